#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "objnav/cli/config.hpp"

namespace objnav::cli {

inline constexpr int kLogVersion = 1;

// Non-finite numbers are written as strings so that inf and NaN survive.
inline json number_json(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

inline double number_from_json(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    if (s == "nan") return std::nan("");
  }
  throw ParseError("number", "expected a number, got " + j.dump());
}

inline json pose_json(const world::AgentPose& p) {
  return {{"x", p.x}, {"y", p.y}, {"heading", p.heading}, {"floor", p.floor}};
}

inline world::AgentPose pose_from_json(const json& j) {
  return {j.at("x").get<double>(), j.at("y").get<double>(), j.at("heading").get<double>(), j.at("floor").get<int>()};
}

inline json spec_json(const world::EpisodeSpec& s) {
  return {{"scene_id", s.scene_id},
          {"start", pose_json(s.start)},
          {"goal_category", s.goal_category},
          {"shortest_distance", number_json(s.shortest_distance)},
          {"seed", s.seed}};
}

inline world::EpisodeSpec spec_from_json(const json& j) {
  world::EpisodeSpec s;
  s.scene_id = j.at("scene_id").get<std::string>();
  s.start = pose_from_json(j.at("start"));
  s.goal_category = j.at("goal_category").get<int>();
  s.shortest_distance = number_from_json(j.at("shortest_distance"));
  s.seed = j.at("seed").get<std::uint64_t>();
  return s;
}

inline json goal_json(const std::optional<policy::LongTermGoal>& g) {
  if (!g) return nullptr;
  return {{"row", g->cell.row}, {"col", g->cell.col}, {"source", std::string(policy::to_string(g->source))}};
}

inline std::optional<policy::LongTermGoal> goal_from_json(const json& j) {
  if (j.is_null()) return std::nullopt;
  return policy::LongTermGoal{Cell{j.at("row").get<int>(), j.at("col").get<int>()},
                              policy::goal_source_from_string(j.at("source").get<std::string>())};
}

inline json step_json(const eval::StepRecord& s) {
  json j{{"t", "step"},
         {"i", s.step},
         {"pose", pose_json(s.pose)},
         {"a", std::string(to_string(s.action))},
         {"collided", s.collided},
         {"goal", goal_json(s.goal)},
         {"policy_goal", goal_json(s.policy_goal)},
         {"d_goal", number_json(s.d_goal)},
         {"target_mapped", s.target_mapped},
         {"untrap", s.untrap_override},
         {"events", s.events},
         {"distance", number_json(s.distance)},
         {"path_length", s.path_length},
         {"r1", s.r1},
         {"r2", s.r2}};
  if (!std::isnan(s.selector_distance)) j["selector_distance"] = number_json(s.selector_distance);
  return j;
}

inline eval::StepRecord step_from_json(const json& j) {
  eval::StepRecord s;
  s.step = j.at("i").get<int>();
  s.pose = pose_from_json(j.at("pose"));
  s.action = action_from_string(j.at("a").get<std::string>());
  s.collided = j.at("collided").get<bool>();
  s.goal = goal_from_json(j.at("goal"));
  s.policy_goal = goal_from_json(j.at("policy_goal"));
  s.d_goal = number_from_json(j.at("d_goal"));
  s.target_mapped = j.at("target_mapped").get<bool>();
  s.untrap_override = j.at("untrap").get<bool>();
  s.events = j.at("events").get<std::vector<std::string>>();
  s.distance = number_from_json(j.at("distance"));
  s.path_length = j.at("path_length").get<double>();
  s.r1 = j.at("r1").get<double>();
  s.r2 = j.at("r2").get<double>();
  if (j.contains("selector_distance")) s.selector_distance = number_from_json(j.at("selector_distance"));
  return s;
}

inline json result_json(const eval::EpisodeResult& r) {
  return {{"success", r.success},
          {"stopped", r.stopped},
          {"path_length", r.path_length},
          {"shortest", number_json(r.shortest)},
          {"steps_used", r.steps_used},
          {"step_cap", r.step_cap},
          {"final_distance", number_json(r.final_distance)},
          {"final_pose", pose_json(r.final_pose)},
          {"failure_label", r.failure_label ? json(std::string(eval::to_string(*r.failure_label))) : json(nullptr)}};
}

inline eval::EpisodeResult result_from_json(const json& j, const world::EpisodeSpec& spec) {
  eval::EpisodeResult r;
  r.spec = spec;
  r.success = j.at("success").get<bool>();
  r.stopped = j.at("stopped").get<bool>();
  r.path_length = j.at("path_length").get<double>();
  r.shortest = number_from_json(j.at("shortest"));
  r.steps_used = j.at("steps_used").get<int>();
  r.step_cap = j.at("step_cap").get<int>();
  r.final_distance = number_from_json(j.at("final_distance"));
  r.final_pose = pose_from_json(j.at("final_pose"));
  if (!j.at("failure_label").is_null())
    r.failure_label = eval::failure_label_from_string(j.at("failure_label").get<std::string>());
  return r;
}

struct LogHeader {
  std::string op = "agent";  // operator: agent or human
  std::string phase = "test";
  std::string digest;
  int episode = 0;
  world::EpisodeSpec spec;
};

// One episode: header line, one line per step, result line.
struct TrajectoryLog {
  LogHeader header;
  std::vector<eval::StepRecord> steps;
  eval::EpisodeResult fixed;
  std::optional<eval::EpisodeResult> dynamic;
};

inline std::string format_log(const LogHeader& h, const eval::EpisodeOutcome& o) {
  std::string out;
  const json header{{"t", "header"},   {"version", kLogVersion}, {"operator", h.op}, {"phase", h.phase},
                    {"digest", h.digest}, {"episode", h.episode},  {"spec", spec_json(h.spec)}};
  out += header.dump() + "\n";
  for (const auto& s : o.steps) out += step_json(s).dump() + "\n";
  json result{{"t", "result"}, {"fixed", result_json(o.fixed)}};
  if (o.dynamic) result["dynamic"] = result_json(*o.dynamic);
  out += result.dump() + "\n";
  return out;
}

inline TrajectoryLog parse_log(const std::string& text, const std::string& where = "log") {
  TrajectoryLog log;
  std::size_t line_no = 0, pos = 0;
  bool have_header = false, have_result = false;
  while (pos < text.size()) {
    const std::size_t end = text.find('\n', pos);
    const std::string line = text.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
    pos = end == std::string::npos ? text.size() : end + 1;
    ++line_no;
    if (line.empty()) continue;
    const std::string loc = where + ":" + std::to_string(line_no);
    try {
      const json j = json::parse(line);
      const std::string t = j.at("t").get<std::string>();
      if (have_result) throw ParseError(loc, "line after the result line");
      if (t == "header") {
        if (have_header) throw ParseError(loc, "second header");
        if (j.at("version").get<int>() != kLogVersion) throw ParseError(loc, "unsupported log version");
        log.header.op = j.at("operator").get<std::string>();
        log.header.phase = j.at("phase").get<std::string>();
        log.header.digest = j.at("digest").get<std::string>();
        log.header.episode = j.at("episode").get<int>();
        log.header.spec = spec_from_json(j.at("spec"));
        have_header = true;
      } else if (!have_header) {
        throw ParseError(loc, "missing header");
      } else if (t == "step") {
        eval::StepRecord s = step_from_json(j);
        if (s.step != static_cast<int>(log.steps.size()))
          throw ParseError(loc, "step index " + std::to_string(s.step) + " breaks the sequence");
        log.steps.push_back(std::move(s));
      } else if (t == "result") {
        log.fixed = result_from_json(j.at("fixed"), log.header.spec);
        if (j.contains("dynamic")) log.dynamic = result_from_json(j.at("dynamic"), log.header.spec);
        have_result = true;
      } else {
        throw ParseError(loc, "unknown line type '" + t + "'");
      }
    } catch (const json::exception& e) {
      throw ParseError(loc, e.what());
    } catch (const ConfigError& e) {
      throw ParseError(loc, e.what());
    }
  }
  if (!have_result) throw ParseError(where, "log has no result line");
  return log;
}

inline TrajectoryLog load_log(const std::filesystem::path& path) { return parse_log(read_file(path), path.string()); }

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

// Pipeline used for operator-driven episodes: nothing overrides the operator.
inline eval::PipelineConfig operator_pipeline(eval::PipelineConfig p) {
  p.enhance.untrap = false;
  p.enhance.dynamic_goal = false;
  return p;
}

struct ReplayReport {
  eval::EpisodeOutcome outcome;
  bool poses_match = true;
  int first_mismatch = -1;
};

// Re-drives the world with the logged actions and re-derives the results.
// Failure labels are recomputed from the logged step records together with
// the replayed map.
inline ReplayReport replay_log(const TrajectoryLog& log, const world::Scene& scene, const eval::PipelineConfig& pipe,
                               const eval::EvalConfig& cfg) {
  const eval::PipelineConfig p = log.header.op == "human" ? operator_pipeline(pipe) : pipe;
  eval::EpisodeSession session(scene, log.header.spec, p, cfg);
  ReplayReport rep;
  for (const auto& s : log.steps) {
    if (session.done()) throw ParseError("replay", "log continues after the episode ended");
    const auto& rec = session.apply(s.action);
    if (rep.poses_match && !(rec.pose.x == s.pose.x && rec.pose.y == s.pose.y && rec.pose.heading == s.pose.heading &&
                             rec.pose.floor == s.pose.floor)) {
      rep.poses_match = false;
      rep.first_mismatch = s.step;
    }
  }
  rep.outcome = eval::summarize(session, log.steps);
  return rep;
}

inline const world::Scene& scene_by_id(const std::vector<world::Scene>& scenes, const std::string& id) {
  for (const auto& s : scenes)
    if (s.id() == id) return s;
  throw ConfigError("no scene with id '" + id + "' in the configured scene set");
}

}  // namespace objnav::cli
