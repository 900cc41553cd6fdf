#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "objnav/eval/batch.hpp"
#include "objnav/world/scene_io.hpp"

namespace objnav::cli {

using nlohmann::json;

// Reads an object field by field and rejects keys nobody asked for, so a
// misspelt option is an error instead of a silent default.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(where_ + "." + key + ": " + e.what());
    }
  }

  bool has(const char* key) const { return j_.contains(key); }

  const json& at(const char* key) {
    seen_.insert(key);
    return j_.at(key);
  }

  std::string path(const char* key) const { return where_ + "." + key; }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) throw ConfigError(where_ + ": unknown key '" + k + "'");
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

inline json generation_json(const world::GenerationParams& p) {
  return {{"floors", p.floors},
          {"rooms_per_floor", p.rooms_per_floor},
          {"corridor_width", p.corridor_width},
          {"object_density", p.object_density},
          {"categories", p.categories},
          {"room_size", p.room_size},
          {"min_room", p.min_room},
          {"cell_size", p.cell_size},
          {"wall_cells", p.wall_cells},
          {"narrow_door_width", p.narrow_door_width},
          {"narrow_door_prob", p.narrow_door_prob},
          {"clutter_per_room", p.clutter_per_room},
          {"stair_length", p.stair_length},
          {"stair_width", p.stair_width},
          {"partition_categories_by_floor", p.partition_categories_by_floor},
          {"max_retries", p.max_retries}};
}

inline world::GenerationParams generation_from_json(const json& j, const std::string& where) {
  world::GenerationParams p;
  ObjectReader r(j, where);
  r.get("floors", p.floors);
  r.get("rooms_per_floor", p.rooms_per_floor);
  r.get("corridor_width", p.corridor_width);
  r.get("object_density", p.object_density);
  r.get("categories", p.categories);
  r.get("room_size", p.room_size);
  r.get("min_room", p.min_room);
  r.get("cell_size", p.cell_size);
  r.get("wall_cells", p.wall_cells);
  r.get("narrow_door_width", p.narrow_door_width);
  r.get("narrow_door_prob", p.narrow_door_prob);
  r.get("clutter_per_room", p.clutter_per_room);
  r.get("stair_length", p.stair_length);
  r.get("stair_width", p.stair_width);
  r.get("partition_categories_by_floor", p.partition_categories_by_floor);
  r.get("max_retries", p.max_retries);
  r.finish();
  p.validate();
  return p;
}

inline json detector_json(const perception::DetectorModel& d) {
  return {{"name", d.name},
          {"recall", d.recall},
          {"confusion", d.confusion},
          {"max_detect_range", d.max_detect_range},
          {"false_positive_rate", d.false_positive_rate}};
}

inline perception::DetectorModel detector_from_json(const json& j, const std::string& where) {
  perception::DetectorModel d;
  ObjectReader r(j, where);
  r.get("name", d.name);
  r.get("recall", d.recall);
  r.get("confusion", d.confusion);
  r.get("max_detect_range", d.max_detect_range);
  r.get("false_positive_rate", d.false_positive_rate);
  r.finish();
  return d;
}

// Everything a batch run, an evaluation or a session server needs.
struct RunConfig {
  std::vector<std::string> scene_paths;
  std::optional<world::GenerationParams> generation;
  int scene_count = 10;
  int episodes = 10;
  std::vector<int> categories;  // goal categories to sample from; empty means all present
  world::SamplingOptions sampling;
  std::string detector_preset = "identity";
  std::optional<perception::DetectorModel> detector;  // inline model, replaces the preset
  double detect_range = 4.0;                          // preset detection range, meters
  int detector_categories = 0;                        // 0: generation categories or the scenes' bound
  int m_local = 240;
  bool augment = false;
  perception::AugmentConfig augment_params;
  world::SensorConfig sensor;
  world::MotionParams motion;
  policy::PolicyConfig policy;
  int candidate_margin = 24;  // default discrete candidates, used when none are listed
  policy::PlannerConfig planner;
  enhance::EnhancementConfig enhance;
  policy::RewardConfig reward;
  eval::EvalConfig eval;
  std::string out = "runs";
  std::uint64_t seed = 0;
  int practice_scenes = 2;
  int practice_episodes = 3;  // completed practice episodes needed to unlock test episodes

  void validate() const {
    if (scene_paths.empty() == !generation.has_value())
      throw ConfigError("config: give exactly one of 'scenes' (paths) and 'generation' (parameters)");
    if (generation) generation->validate();
    if (scene_count < 1) throw ConfigError("config: scene_count must be >= 1");
    if (episodes < 1) throw ConfigError("config: episodes must be >= 1");
    if (!detector) {
      const auto names = perception::preset_names();
      if (std::find(names.begin(), names.end(), detector_preset) == names.end())
        throw ConfigError("config: unknown detector preset '" + detector_preset + "'");
    }
    if (practice_scenes < 1 || practice_episodes < 0)
      throw ConfigError("config: practice_scenes must be >= 1 and practice_episodes >= 0");
    eval.validate();
  }
};

inline json cell_list_json(const std::vector<Cell>& cells) {
  json a = json::array();
  for (const Cell& c : cells) a.push_back({c.row, c.col});
  return a;
}

// Canonical form: every field, defaults resolved.
inline json to_json(const RunConfig& c) {
  json j;
  if (c.generation) {
    j["generation"] = generation_json(*c.generation);
    j["scene_count"] = c.scene_count;
  } else {
    j["scenes"] = c.scene_paths;
  }
  j["episodes"] = c.episodes;
  j["categories"] = c.categories;
  j["sampling"] = {{"min_start_distance", c.sampling.min_start_distance},
                   {"heading_step", c.sampling.heading_step},
                   {"start_floor", c.sampling.start_floor ? json(*c.sampling.start_floor) : json(nullptr)}};
  if (c.detector) j["detector"] = detector_json(*c.detector);
  else j["detector"] = c.detector_preset;
  j["detect_range"] = c.detect_range;
  j["detector_categories"] = c.detector_categories;
  j["map"] = {{"m_local", c.m_local},
              {"augment", c.augment},
              {"augment_params",
               {{"denoise_min_blob", c.augment_params.denoise_min_blob},
                {"obstacle_dilation_cells", c.augment_params.obstacle_dilation_cells},
                {"hole_fill_max", c.augment_params.hole_fill_max}}}};
  j["sensor"] = {{"fov_degrees", c.sensor.fov_degrees}, {"ray_count", c.sensor.ray_count}, {"max_range", c.sensor.max_range}};
  j["motion"] = {{"forward_step", c.motion.forward_step},
                 {"turn_degrees", c.motion.turn_degrees},
                 {"collision_lookahead", c.motion.collision_lookahead},
                 {"probe_range", c.motion.probe_range}};
  j["policy"] = {{"kind", std::string(policy::to_string(c.policy.kind))},
                 {"f_update", c.policy.f_update},
                 {"candidates", cell_list_json(c.policy.candidates)},
                 {"candidate_margin", c.candidate_margin},
                 {"corner_margin", c.policy.corner_margin},
                 {"frontier_min_cluster", c.policy.frontier_min_cluster}};
  j["planner"] = {{"unknown_cost", c.planner.unknown_cost},
                  {"stop_radius", c.planner.stop_radius},
                  {"lookahead", c.planner.lookahead},
                  {"footprint_cells", c.planner.footprint_cells},
                  {"goal_clearance_cells", c.planner.goal_clearance_cells},
                  {"search_margin", c.planner.search_margin}};
  j["enhance"] = {{"untrap", c.enhance.untrap},
                  {"dynamic_goal", c.enhance.dynamic_goal},
                  {"remap", c.enhance.remap},
                  {"tau_coll", c.enhance.tau_coll},
                  {"tau_block", c.enhance.tau_block},
                  {"f_update", c.enhance.f_update},
                  {"tau_unreachable", c.enhance.tau_unreachable},
                  {"tau_reached", c.enhance.tau_reached},
                  {"stair_dwell_threshold", c.enhance.stair_dwell_threshold}};
  j["reward"] = {{"alpha1", c.reward.alpha1},
                 {"alpha2", c.reward.alpha2},
                 {"alpha3", c.reward.alpha3},
                 {"alpha4", c.reward.alpha4},
                 {"type", std::string(policy::to_string(c.reward.type))}};
  const auto& f = c.eval.failure;
  j["eval"] = {{"success_radius", c.eval.success_radius},
               {"max_steps_fixed", c.eval.max_steps_fixed},
               {"alpha", c.eval.alpha},
               {"mode", std::string(eval::to_string(c.eval.mode))},
               {"require_stop", c.eval.require_stop},
               {"failure",
                {{"near_miss_slack", f.near_miss_slack},
                 {"trapped_window", f.trapped_window},
                 {"trapped_activations", f.trapped_activations},
                 {"trapped_collisions", f.trapped_collisions},
                 {"no_stop_distance", f.no_stop_distance},
                 {"no_stop_steps", f.no_stop_steps},
                 {"map_error_radius", f.map_error_radius}}}};
  j["practice"] = {{"scenes", c.practice_scenes}, {"episodes", c.practice_episodes}};
  j["out"] = c.out;
  j["seed"] = c.seed;
  return j;
}

inline RunConfig config_from_json(const json& j) {
  RunConfig c;
  ObjectReader r(j, "config");
  r.get("scenes", c.scene_paths);
  if (r.has("generation")) c.generation = generation_from_json(r.at("generation"), "config.generation");
  r.get("scene_count", c.scene_count);
  r.get("episodes", c.episodes);
  r.get("categories", c.categories);
  if (r.has("sampling")) {
    ObjectReader s(r.at("sampling"), "config.sampling");
    s.get("min_start_distance", c.sampling.min_start_distance);
    s.get("heading_step", c.sampling.heading_step);
    json floor;
    s.get("start_floor", floor);
    if (floor.is_number_integer()) c.sampling.start_floor = floor.get<int>();
    else if (!floor.is_null()) throw ConfigError("config.sampling.start_floor: expected an integer or null");
    s.finish();
  }
  if (r.has("detector")) {
    const json& d = r.at("detector");
    if (d.is_string()) c.detector_preset = d.get<std::string>();
    else c.detector = detector_from_json(d, "config.detector");
  }
  r.get("detect_range", c.detect_range);
  r.get("detector_categories", c.detector_categories);
  if (r.has("map")) {
    ObjectReader m(r.at("map"), "config.map");
    m.get("m_local", c.m_local);
    m.get("augment", c.augment);
    if (m.has("augment_params")) {
      ObjectReader a(m.at("augment_params"), "config.map.augment_params");
      a.get("denoise_min_blob", c.augment_params.denoise_min_blob);
      a.get("obstacle_dilation_cells", c.augment_params.obstacle_dilation_cells);
      a.get("hole_fill_max", c.augment_params.hole_fill_max);
      a.finish();
    }
    m.finish();
  }
  if (r.has("sensor")) {
    ObjectReader s(r.at("sensor"), "config.sensor");
    s.get("fov_degrees", c.sensor.fov_degrees);
    s.get("ray_count", c.sensor.ray_count);
    s.get("max_range", c.sensor.max_range);
    s.finish();
  }
  if (r.has("motion")) {
    ObjectReader s(r.at("motion"), "config.motion");
    s.get("forward_step", c.motion.forward_step);
    s.get("turn_degrees", c.motion.turn_degrees);
    s.get("collision_lookahead", c.motion.collision_lookahead);
    s.get("probe_range", c.motion.probe_range);
    s.finish();
  }
  if (r.has("policy")) {
    ObjectReader p(r.at("policy"), "config.policy");
    std::string kind(policy::to_string(c.policy.kind));
    p.get("kind", kind);
    c.policy.kind = policy::policy_kind_from_string(kind);
    p.get("f_update", c.policy.f_update);
    std::vector<std::array<int, 2>> cands;
    p.get("candidates", cands);
    for (const auto& [row, col] : cands) c.policy.candidates.push_back({row, col});
    p.get("candidate_margin", c.candidate_margin);
    p.get("corner_margin", c.policy.corner_margin);
    p.get("frontier_min_cluster", c.policy.frontier_min_cluster);
    p.finish();
  }
  if (r.has("planner")) {
    ObjectReader p(r.at("planner"), "config.planner");
    p.get("unknown_cost", c.planner.unknown_cost);
    p.get("stop_radius", c.planner.stop_radius);
    p.get("lookahead", c.planner.lookahead);
    p.get("footprint_cells", c.planner.footprint_cells);
    p.get("goal_clearance_cells", c.planner.goal_clearance_cells);
    p.get("search_margin", c.planner.search_margin);
    p.finish();
  }
  if (r.has("enhance")) {
    ObjectReader e(r.at("enhance"), "config.enhance");
    e.get("untrap", c.enhance.untrap);
    e.get("dynamic_goal", c.enhance.dynamic_goal);
    e.get("remap", c.enhance.remap);
    e.get("tau_coll", c.enhance.tau_coll);
    e.get("tau_block", c.enhance.tau_block);
    e.get("f_update", c.enhance.f_update);
    e.get("tau_unreachable", c.enhance.tau_unreachable);
    e.get("tau_reached", c.enhance.tau_reached);
    e.get("stair_dwell_threshold", c.enhance.stair_dwell_threshold);
    e.finish();
  }
  if (r.has("reward")) {
    ObjectReader w(r.at("reward"), "config.reward");
    w.get("alpha1", c.reward.alpha1);
    w.get("alpha2", c.reward.alpha2);
    w.get("alpha3", c.reward.alpha3);
    w.get("alpha4", c.reward.alpha4);
    std::string type(policy::to_string(c.reward.type));
    w.get("type", type);
    c.reward.type = policy::reward_type_from_string(type);
    w.finish();
  }
  if (r.has("eval")) {
    ObjectReader e(r.at("eval"), "config.eval");
    e.get("success_radius", c.eval.success_radius);
    e.get("max_steps_fixed", c.eval.max_steps_fixed);
    e.get("alpha", c.eval.alpha);
    std::string mode(eval::to_string(c.eval.mode));
    e.get("mode", mode);
    c.eval.mode = eval::eval_mode_from_string(mode);
    e.get("require_stop", c.eval.require_stop);
    if (e.has("failure")) {
      auto& f = c.eval.failure;
      ObjectReader fr(e.at("failure"), "config.eval.failure");
      fr.get("near_miss_slack", f.near_miss_slack);
      fr.get("trapped_window", f.trapped_window);
      fr.get("trapped_activations", f.trapped_activations);
      fr.get("trapped_collisions", f.trapped_collisions);
      fr.get("no_stop_distance", f.no_stop_distance);
      fr.get("no_stop_steps", f.no_stop_steps);
      fr.get("map_error_radius", f.map_error_radius);
      fr.finish();
    }
    e.finish();
  }
  if (r.has("practice")) {
    ObjectReader p(r.at("practice"), "config.practice");
    p.get("scenes", c.practice_scenes);
    p.get("episodes", c.practice_episodes);
    p.finish();
  }
  r.get("out", c.out);
  r.get("seed", c.seed);
  r.finish();
  c.validate();
  return c;
}

inline RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("config byte " + std::to_string(e.byte), e.what());
  }
  return config_from_json(j);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline RunConfig load_config(const std::filesystem::path& path) {
  try {
    return parse_config(read_file(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

// Hash of the canonical form minus the output location, which does not
// change what runs.
inline std::string config_digest(const RunConfig& c) {
  json j = to_json(c);
  j.erase("out");
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(j.dump())));
  return buf;
}

// Scenes, episodes and pipeline resolved from a config. Tasks point into
// `scenes`, so a workload moves but never copies.
struct Workload {
  Workload() = default;
  Workload(Workload&&) = default;
  Workload& operator=(Workload&&) = default;
  Workload(const Workload&) = delete;
  Workload& operator=(const Workload&) = delete;

  std::vector<world::Scene> scenes;
  std::vector<eval::EpisodeTask> tasks;
  eval::PipelineConfig pipeline;
};

inline std::vector<world::Scene> build_scenes(const RunConfig& c, const std::filesystem::path& base = {}) {
  if (c.generation) return eval::generate_scenes(*c.generation, c.scene_count, derive_seed(c.seed, 0));
  std::vector<world::Scene> scenes;
  for (const auto& p : c.scene_paths) {
    const std::filesystem::path path = std::filesystem::path(p).is_absolute() || base.empty() ? std::filesystem::path(p) : base / p;
    scenes.push_back(world::load_scene(path));
  }
  return scenes;
}

inline int detector_categories(const RunConfig& c, const std::vector<world::Scene>& scenes) {
  if (c.detector_categories > 0) return c.detector_categories;
  int bound = c.generation ? c.generation->categories : 1;
  for (const auto& s : scenes) bound = std::max(bound, s.category_bound());
  return bound;
}

inline eval::PipelineConfig build_pipeline(const RunConfig& c, int categories) {
  eval::PipelineConfig p;
  p.detector = c.detector ? *c.detector : perception::detector_preset(c.detector_preset, categories, c.detect_range);
  p.sensor = c.sensor;
  p.motion = c.motion;
  p.m_local = c.m_local;
  p.augment = c.augment;
  p.augment_params = c.augment_params;
  p.policy = c.policy;
  if (p.policy.kind == policy::PolicyKind::DiscreteCandidate && p.policy.candidates.empty())
    p.policy.candidates = policy::default_candidates(c.m_local, c.candidate_margin);
  p.planner = c.planner;
  p.enhance = c.enhance;
  p.reward = c.reward;
  p.validate();
  return p;
}

// Episode i samples its goal uniformly from the allowed categories present
// in scene i % scenes.
inline std::vector<eval::EpisodeTask> build_tasks(const RunConfig& c, const std::vector<world::Scene>& scenes,
                                                  int episodes, std::uint64_t seed) {
  if (c.categories.empty()) return eval::make_tasks(scenes, episodes, seed, c.sampling);
  std::vector<eval::EpisodeTask> out;
  for (int i = 0; i < episodes; ++i) {
    const world::Scene& scene = scenes[static_cast<std::size_t>(i) % scenes.size()];
    std::vector<int> cats;
    for (int cat : c.categories)
      if (scene.has_category(cat)) cats.push_back(cat);
    if (cats.empty()) throw ConfigError("config: scene " + scene.id() + " has none of the listed categories");
    const std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(i));
    Rng rng(s);
    const int cat = cats[rng.uniform_int(cats.size())];
    out.push_back({&scene, world::sample_episode(scene, cat, derive_seed(s, 1), c.sampling)});
  }
  return out;
}

inline Workload build_workload(const RunConfig& c, const std::filesystem::path& base = {}) {
  Workload w;
  w.scenes = build_scenes(c, base);
  const int categories = detector_categories(c, w.scenes);
  w.pipeline = build_pipeline(c, categories);
  if (w.pipeline.detector.categories() < categories)
    throw ConfigError("detector '" + w.pipeline.detector.name + "' covers " +
                      std::to_string(w.pipeline.detector.categories()) + " categories, scenes use " +
                      std::to_string(categories));
  w.tasks = build_tasks(c, w.scenes, c.episodes, derive_seed(c.seed, 1));
  return w;
}

}  // namespace objnav::cli
