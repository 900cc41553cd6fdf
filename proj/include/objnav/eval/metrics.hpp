#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "objnav/world/episode.hpp"

namespace objnav::eval {

enum class EvalMode : std::uint8_t { Fixed, Dynamic, Both };

inline std::string_view to_string(EvalMode m) {
  switch (m) {
    case EvalMode::Fixed: return "fixed";
    case EvalMode::Dynamic: return "dynamic";
    case EvalMode::Both: return "both";
  }
  return "both";
}

inline EvalMode eval_mode_from_string(std::string_view s) {
  if (s == "fixed") return EvalMode::Fixed;
  if (s == "dynamic") return EvalMode::Dynamic;
  if (s == "both") return EvalMode::Both;
  throw ConfigError("unknown eval mode '" + std::string(s) + "'");
}

struct FailureRules {
  double near_miss_slack = 0.25;      // meters beyond the success radius
  int trapped_window = 50;            // final steps inspected for trap activity
  int trapped_activations = 3;        // untrap overrides in the window
  int trapped_collisions = 15;        // collided steps in the window, used when the helper is off
  double no_stop_distance = 2.0;      // meters
  int no_stop_steps = 30;
  double map_error_radius = 1.0;      // meters
};

struct EvalConfig {
  double success_radius = 1.0;
  int max_steps_fixed = 500;
  double alpha = 5.0;
  EvalMode mode = EvalMode::Both;
  bool require_stop = false;
  FailureRules failure;

  void validate() const {
    if (!(success_radius > 0.0)) throw ConfigError("eval: success_radius must be > 0");
    if (max_steps_fixed < 1) throw ConfigError("eval: max_steps_fixed must be >= 1");
    if (!(alpha >= 1.0)) throw ConfigError("eval: alpha must be >= 1");
  }

  // Grid distances are sums of cell steps, so allow rounding at the boundary.
  bool within_radius(double distance) const { return distance <= success_radius + 1e-9; }
};

// ceil(alpha * (D / d + 360 / theta)), never above `cap`.
inline int max_dynamic_steps(double shortest, double forward_step, double turn_degrees, double alpha,
                             int cap = std::numeric_limits<int>::max()) {
  if (!(shortest > 0.0) || !(forward_step > 0.0) || !(turn_degrees > 0.0) || !(alpha > 0.0))
    throw ConfigError("max_dynamic_steps: all parameters must be positive");
  const double v = alpha * (shortest / forward_step + 360.0 / turn_degrees);
  const double steps = std::ceil(v - 1e-9 * std::max(1.0, v));
  return steps >= static_cast<double>(cap) ? cap : static_cast<int>(steps);
}

inline int max_dynamic_steps(double shortest, const world::MotionParams& motion, double alpha,
                             int cap = std::numeric_limits<int>::max()) {
  return max_dynamic_steps(shortest, motion.forward_step, motion.turn_degrees, alpha, cap);
}

enum class FailureLabel : std::uint8_t {
  Misdetection,
  IncompleteExploration,
  Trapped,
  NoStopNearTarget,
  WrongFloor,
  MapError,
  FalseNegativeSuccess
};

inline constexpr std::array<FailureLabel, 7> kFailureLabels{
    FailureLabel::Misdetection,     FailureLabel::IncompleteExploration, FailureLabel::Trapped,
    FailureLabel::NoStopNearTarget, FailureLabel::WrongFloor,            FailureLabel::MapError,
    FailureLabel::FalseNegativeSuccess};

inline std::string_view to_string(FailureLabel f) {
  switch (f) {
    case FailureLabel::Misdetection: return "misdetection";
    case FailureLabel::IncompleteExploration: return "incomplete_exploration";
    case FailureLabel::Trapped: return "trapped";
    case FailureLabel::NoStopNearTarget: return "no_stop_near_target";
    case FailureLabel::WrongFloor: return "wrong_floor";
    case FailureLabel::MapError: return "map_error";
    case FailureLabel::FalseNegativeSuccess: return "false_negative_success";
  }
  return "incomplete_exploration";
}

inline FailureLabel failure_label_from_string(std::string_view s) {
  for (FailureLabel f : kFailureLabels)
    if (to_string(f) == s) return f;
  throw ParseError("failure_label", "unknown failure label '" + std::string(s) + "'");
}

struct EpisodeResult {
  world::EpisodeSpec spec;
  bool success = false;
  bool stopped = false;
  double path_length = 0.0;  // p, meters
  double shortest = 0.0;     // l, meters
  int steps_used = 0;
  int step_cap = 0;
  double final_distance = 0.0;
  world::AgentPose final_pose;
  std::optional<FailureLabel> failure_label;
};

// The episode ends within the success radius of a goal-category instance
// (and, with require_stop, on an explicit Stop).
inline bool success_check(const world::Scene& scene, const world::AgentPose& final_pose, int goal_category,
                          bool stopped, const EvalConfig& cfg) {
  if (cfg.require_stop && !stopped) return false;
  return cfg.within_radius(world::geodesic_distance(scene, final_pose, goal_category));
}

inline void require_nonempty(std::span<const EpisodeResult> r, const char* what) {
  if (r.empty()) throw ConfigError(std::string(what) + ": no episodes");
}

inline double spl_term(const EpisodeResult& r) {
  if (!r.success) return 0.0;
  return r.shortest / std::max(r.path_length, r.shortest);
}

inline double success_rate(std::span<const EpisodeResult> results) {
  require_nonempty(results, "success rate");
  double s = 0.0;
  for (const auto& r : results) s += r.success ? 1.0 : 0.0;
  return s / static_cast<double>(results.size());
}

// Mean over all episodes; failures contribute 0.
inline double spl(std::span<const EpisodeResult> results) {
  require_nonempty(results, "spl");
  double s = 0.0;
  for (const auto& r : results) s += spl_term(r);
  return s / static_cast<double>(results.size());
}

// Mean over successful episodes only (0 when there are none).
inline double spl_successful_only(std::span<const EpisodeResult> results) {
  double s = 0.0;
  int n = 0;
  for (const auto& r : results)
    if (r.success) {
      s += spl_term(r);
      ++n;
    }
  return n == 0 ? 0.0 : s / n;
}

inline double dts(std::span<const EpisodeResult> results, double success_radius) {
  require_nonempty(results, "dts");
  double s = 0.0;
  for (const auto& r : results) s += std::max(0.0, r.final_distance - success_radius);
  return s / static_cast<double>(results.size());
}

inline double dts_raw(std::span<const EpisodeResult> results) {
  require_nonempty(results, "dts");
  double s = 0.0;
  for (const auto& r : results) s += r.final_distance;
  return s / static_cast<double>(results.size());
}

struct MetricsReport {
  int episodes = 0;
  double sr = 0.0, spl = 0.0, dts = 0.0;
  double d_sr = 0.0, d_spl = 0.0, d_dts = 0.0;
  double dts_raw = 0.0, d_dts_raw = 0.0;
  double spl_success_only = 0.0, d_spl_success_only = 0.0;
  bool has_dynamic = false;
  std::map<std::string, int> failures;  // fixed-setting labels

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["episodes"] = episodes;
    j["SR"] = sr;
    j["SPL"] = spl;
    j["DTS"] = dts;
    j["DTS_raw"] = dts_raw;
    j["SPL_success_only"] = spl_success_only;
    if (has_dynamic) {
      j["D_SR"] = d_sr;
      j["D_SPL"] = d_spl;
      j["D_DTS"] = d_dts;
      j["D_DTS_raw"] = d_dts_raw;
      j["D_SPL_success_only"] = d_spl_success_only;
    }
    j["failures"] = failures;
    return j;
  }

  std::string to_table() const {
    char buf[256];
    std::string out;
    std::snprintf(buf, sizeof buf, "%-10s %8s %8s %8s %8s %8s %8s\n", "episodes", "SR", "SPL", "DTS", "D-SR", "D-SPL",
                  "D-DTS");
    out += buf;
    if (has_dynamic)
      std::snprintf(buf, sizeof buf, "%-10d %8.3f %8.3f %8.3f %8.3f %8.3f %8.3f\n", episodes, sr, spl, dts, d_sr, d_spl,
                    d_dts);
    else
      std::snprintf(buf, sizeof buf, "%-10d %8.3f %8.3f %8.3f %8s %8s %8s\n", episodes, sr, spl, dts, "-", "-", "-");
    out += buf;
    if (!failures.empty()) {
      out += "failures:";
      for (const auto& [k, v] : failures) out += " " + k + "=" + std::to_string(v);
      out += "\n";
    }
    return out;
  }
};

// `dynamic` may be empty (fixed-only evaluation); otherwise it must pair
// one-to-one with `fixed`.
inline MetricsReport aggregate(std::span<const EpisodeResult> fixed, std::span<const EpisodeResult> dynamic,
                               double success_radius) {
  require_nonempty(fixed, "aggregate");
  if (!dynamic.empty() && dynamic.size() != fixed.size())
    throw ConfigError("aggregate: dynamic results do not pair with fixed results");
  MetricsReport m;
  m.episodes = static_cast<int>(fixed.size());
  m.sr = success_rate(fixed);
  m.spl = spl(fixed);
  m.dts = dts(fixed, success_radius);
  m.dts_raw = dts_raw(fixed);
  m.spl_success_only = spl_successful_only(fixed);
  if (!dynamic.empty()) {
    m.has_dynamic = true;
    m.d_sr = success_rate(dynamic);
    m.d_spl = spl(dynamic);
    m.d_dts = dts(dynamic, success_radius);
    m.d_dts_raw = dts_raw(dynamic);
    m.d_spl_success_only = spl_successful_only(dynamic);
  }
  for (const auto& r : fixed)
    if (r.failure_label) ++m.failures[std::string(to_string(*r.failure_label))];
  return m;
}

}  // namespace objnav::eval
