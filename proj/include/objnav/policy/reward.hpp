#pragma once

#include <cmath>
#include <string>

#include "objnav/core.hpp"

namespace objnav::policy {

enum class RewardType : std::uint8_t { R1, R2 };

inline std::string_view to_string(RewardType t) { return t == RewardType::R1 ? "r1" : "r2"; }

inline RewardType reward_type_from_string(std::string_view s) {
  if (s == "r1" || s == "R1") return RewardType::R1;
  if (s == "r2" || s == "R2") return RewardType::R2;
  throw ConfigError("unknown reward type '" + std::string(s) + "'");
}

struct RewardConfig {
  double alpha1 = 1.0;    // per m^2 of newly explored area
  double alpha2 = 1.0;    // per meter of progress toward the target
  double alpha3 = 2.5;    // success bonus
  double alpha4 = 0.001;  // per-step penalty
  RewardType type = RewardType::R1;

  void validate() const {
    for (double a : {alpha1, alpha2, alpha3, alpha4})
      if (!std::isfinite(a) || a < 0.0) throw ConfigError("reward: alpha values must be finite and >= 0");
  }
};

struct RewardSample {
  double area = 0.0;      // explored area, m^2
  double distance = 0.0;  // distance to the target, m
};

struct RewardTerms {
  double exploration = 0.0;
  double distance = 0.0;
  double success = 0.0;
  double step_penalty = 0.0;  // stored positive, subtracted
};

inline RewardTerms reward_terms(const RewardSample& prev, const RewardSample& curr, bool success,
                                const RewardConfig& cfg) {
  return RewardTerms{cfg.alpha1 * (curr.area - prev.area), cfg.alpha2 * (prev.distance - curr.distance),
                     success ? cfg.alpha3 : 0.0, cfg.alpha4};
}

inline double compute_reward(const RewardSample& prev, const RewardSample& curr, bool success,
                             const RewardConfig& cfg) {
  const RewardTerms t = reward_terms(prev, curr, success, cfg);
  if (cfg.type == RewardType::R1) return t.exploration + t.distance;
  return t.exploration + t.success - t.step_penalty;
}

}  // namespace objnav::policy
