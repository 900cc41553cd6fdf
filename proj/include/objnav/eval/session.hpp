#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "objnav/enhance/strategies.hpp"
#include "objnav/eval/metrics.hpp"
#include "objnav/perception/augment.hpp"
#include "objnav/perception/detector.hpp"
#include "objnav/perception/semantic_map.hpp"
#include "objnav/policy/planner.hpp"
#include "objnav/policy/reward.hpp"
#include "objnav/world/geodesic.hpp"
#include "objnav/world/sensor.hpp"

namespace objnav::eval {

struct PipelineConfig {
  perception::DetectorModel detector = perception::identity_detector(6);
  world::SensorConfig sensor;
  world::MotionParams motion;
  int m_local = 240;
  bool augment = false;
  perception::AugmentConfig augment_params;
  policy::PolicyConfig policy;
  policy::PlannerConfig planner;
  enhance::EnhancementConfig enhance;
  policy::RewardConfig reward;

  void validate() const {
    detector.validate(sensor.max_range);
    motion.validate();
    if (m_local <= 0 || m_local % 2 != 0) throw ConfigError("map: local map size must be positive and even");
    augment_params.validate();
    policy.validate();
    planner.validate();
    enhance.validate();
    reward.validate();
  }
};

struct StepRecord {
  int step = 0;
  world::AgentPose pose;  // after the action
  Action action = Action::Stop;
  bool collided = false;
  std::optional<policy::LongTermGoal> goal;  // active goal, global map frame; absent for operator-driven steps
  std::optional<policy::LongTermGoal> policy_goal;  // the policy's (or goal selector's) goal, global frame
  double selector_distance = std::nan("");  // d_goal seen by dynamic goal selection
  std::vector<std::string> events;
  double r1 = 0.0, r2 = 0.0;
  double d_goal = kInf;         // planner distance to the active goal before the action
  double distance = 0.0;        // geodesic distance to the target after the action
  double path_length = 0.0;     // cumulative
  bool target_mapped = false;   // goal category present on the map before the action
  bool untrap_override = false;
};

struct Frame {
  world::Observation obs;
  std::vector<std::optional<int>> labels;
};

// One episode, advanced one action at a time. Agent-driven episodes call
// agent_step(); operator-driven sessions call apply() with their own actions.
// Both paths share every world, perception and termination rule.
class EpisodeSession {
 public:
  EpisodeSession(const world::Scene& scene, const world::EpisodeSpec& spec, const PipelineConfig& pipe,
                 const EvalConfig& eval)
      : scene_(scene), spec_(spec), pipe_(pipe), eval_(eval),
        field_(scene, world::category_cells(scene, spec.goal_category)),
        global_(perception::make_global_map(scene, pipe.detector.categories())),
        policy_(pipe.policy, derive_seed(spec.seed, 2)), planner_(pipe.planner), det_rng_(derive_seed(spec.seed, 1)),
        pose_(spec.start) {
    pipe_.validate();
    eval_.validate();
    if (scene.category_bound() > pipe.detector.categories())
      throw ConfigError("detector covers " + std::to_string(pipe.detector.categories()) + " categories but scene " +
                        scene.id() + " uses " + std::to_string(scene.category_bound()));
    if (!world::pose_valid(scene, spec.start)) throw ConfigError("episode start pose is not valid in " + scene.id());
    target_floors_ = scene.floors_with_category(spec.goal_category);
    dynamic_cap_ = max_dynamic_steps(std::max(spec.shortest_distance, 1e-9), pipe.motion, eval.alpha, eval.max_steps_fixed);
    cap_ = eval.mode == EvalMode::Dynamic ? dynamic_cap_ : eval.max_steps_fixed;
    obstacle_distance_ = world::obstacle_distance(scene, pose_, pipe.motion.probe_range);
    distance_ = field_.at(pose_, scene.cell_size());
    observe();
    prev_sample_ = sample();
    if (eval_.within_radius(distance_) && !eval_.require_stop) done_ = true;
  }

  const world::Scene& scene() const { return scene_; }
  const world::EpisodeSpec& spec() const { return spec_; }
  const PipelineConfig& pipeline() const { return pipe_; }
  const EvalConfig& eval_config() const { return eval_; }
  const world::AgentPose& pose() const { return pose_; }
  const perception::SemanticMap& global_map() const { return global_; }
  const Frame& frame() const { return frame_; }
  const std::vector<StepRecord>& records() const { return records_; }
  const enhance::EnhancementState& enhancement_state() const { return enh_; }
  int steps() const { return static_cast<int>(records_.size()); }
  int remap_count() const { return remaps_; }
  int step_cap() const { return cap_; }
  int dynamic_cap() const { return dynamic_cap_; }
  bool done() const { return done_; }
  const std::vector<int>& target_floors() const { return target_floors_; }

  // The agent's local view: crop around the agent, augmented when enabled.
  perception::SemanticMap local_map() const {
    perception::SemanticMap local = perception::crop_local(global_, pose_, pipe_.m_local);
    if (pipe_.augment) perception::augment_in_place(local, pipe_.augment_params);
    return local;
  }

  const StepRecord& agent_step() {
    if (done_) throw InvariantError("episode-finished", "agent_step after the episode ended");
    const int t = steps();
    StepRecord rec;
    rec.events = std::move(pending_events_);
    pending_events_.clear();
    const perception::SemanticMap local = local_map();
    const Cell off = local.origin();  // world cell of local (0, 0); the global map origin is (0, 0)
    auto to_local = [&](const policy::LongTermGoal& g) {
      return policy::LongTermGoal{Cell{g.cell.row - off.row, g.cell.col - off.col}, g.source};
    };
    auto to_global = [&](const policy::LongTermGoal& g) {
      return policy::LongTermGoal{Cell{g.cell.row + off.row, g.cell.col + off.col}, g.source};
    };
    auto plan_to = [&](const policy::LongTermGoal& g) { return planner_.plan(local, pose_, to_local(g), pipe_.motion); };

    const auto override_goal = policy::target_override(local, spec_.goal_category);
    rec.target_mapped = override_goal.has_value();

    // Policy goal, held in the global frame so it stays put as the crop moves.
    std::optional<policy::PlanResult> policy_plan;
    if (pipe_.enhance.dynamic_goal) {
      const int f = pipe_.enhance.f_update;
      std::optional<policy::LongTermGoal> prediction;
      if (t % f == 0) prediction = to_global(policy_.predict(local));
      double d = std::nan("");
      if (enh_.current_goal) {
        policy_plan = plan_to(*enh_.current_goal);
        d = policy_plan->d_goal;
      }
      const auto before = enh_.current_goal;
      const policy::LongTermGoal g = enhance::dynamic_goal_select(t, prediction, d, enh_, pipe_.enhance);
      if (before && !(g == *before)) {
        rec.events.push_back("goal_switch");
        policy_plan.reset();
      }
      if (prediction) rec.events.push_back("goal_update");
      policy_goal_ = g;
      rec.selector_distance = d;
    } else if (!policy_goal_ || t % pipe_.policy.f_update == 0 || arrived_) {
      policy_goal_ = to_global(policy_.predict(local));
      rec.events.push_back("goal_update");
    }

    policy::PlanResult plan;
    if (override_goal) {
      const policy::LongTermGoal g = to_global(*override_goal);
      if (!active_override_ || !(active_override_->cell == g.cell)) {
        const Cell w = g.cell;
        bool real = false;
        for (int fl = 0; fl < scene_.num_floors(); ++fl)
          if (scene_.category_at(fl, w) == spec_.goal_category) real = true;
        rec.events.push_back(real ? "override:true" : "override:false");
      }
      active_override_ = g;
      rec.goal = g;
      plan = plan_to(g);
    } else {
      active_override_.reset();
      rec.goal = policy_goal_;
      plan = policy_plan ? *policy_plan : plan_to(*policy_goal_);
      arrived_ = plan.arrived;
    }
    rec.d_goal = plan.d_goal;
    rec.policy_goal = policy_goal_;

    Action action = plan.action;
    if (pipe_.enhance.untrap && action != Action::Stop) {
      if (auto ov = enhance::untrap_step(prev_action_, prev_collided_, obstacle_distance_, enh_, pipe_.enhance)) {
        action = *ov;
        rec.untrap_override = true;
        rec.events.push_back(std::string("untrap:") + std::string(to_string(action)));
      }
    }
    return finish(std::move(rec), action);
  }

  // Advances the world with an externally chosen action.
  const StepRecord& apply(Action action) {
    if (done_) throw InvariantError("episode-finished", "apply after the episode ended");
    StepRecord rec;
    rec.events = std::move(pending_events_);
    pending_events_.clear();
    rec.target_mapped = policy::target_override(local_map(), spec_.goal_category).has_value();
    return finish(std::move(rec), action);
  }

  // Result under the fixed budget (or the dynamic one in Dynamic mode).
  EpisodeResult result() const { return result_at(steps()); }

  // Result of the same trajectory cut at the dynamic budget.
  EpisodeResult dynamic_result() const { return result_at(std::min(steps(), dynamic_cap_), dynamic_cap_); }

  // Goal-category cells on the map with no true target within `radius`.
  bool spurious_target_mapped(double radius) const {
    const auto targets = world::category_cells(scene_, spec_.goal_category);
    const double cs = scene_.cell_size();
    const std::uint8_t* ch = global_.channel(perception::kFirstCategory + spec_.goal_category);
    const int m = global_.size();
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < m; ++c) {
        if (!ch[static_cast<std::size_t>(r) * static_cast<std::size_t>(m) + static_cast<std::size_t>(c)]) continue;
        bool near = false;
        for (const auto& t : targets)
          if (std::hypot(t.cell.row - r, t.cell.col - c) * cs <= radius + 1e-12) {
            near = true;
            break;
          }
        if (!near) return true;
      }
    return false;
  }

 private:
  policy::RewardSample sample() const {
    return {global_.explored_area(), std::isfinite(distance_) ? distance_ : 0.0};
  }

  void observe() {
    frame_.obs = world::render_observation(scene_, pose_, pipe_.sensor);
    frame_.labels = perception::detect(frame_.obs, pipe_.detector, det_rng_);
    perception::project_to_map(global_, frame_.obs, frame_.labels, pose_);
    if (pipe_.enhance.remap) {
      const bool on_stair = scene_.kind(pose_.floor, pose_.cell(scene_.cell_size())) == world::CellKind::Stair;
      if (enhance::remap_check(on_stair, enh_, pipe_.enhance)) {
        global_.clear();
        perception::project_to_map(global_, frame_.obs, frame_.labels, pose_);
        pending_events_.push_back("remap");
        ++remaps_;
      }
    }
  }

  const StepRecord& finish(StepRecord rec, Action action) {
    const world::StepOutcome out = world::step(scene_, pose_, action, pipe_.motion);
    pose_ = out.pose;
    path_length_ += out.displacement;
    obstacle_distance_ = out.obstacle_distance;
    prev_action_ = action;
    prev_collided_ = out.collided;
    distance_ = field_.at(pose_, scene_.cell_size());
    stopped_ = action == Action::Stop;

    rec.step = steps();
    rec.pose = pose_;
    rec.action = action;
    rec.collided = out.collided;
    rec.distance = distance_;
    rec.path_length = path_length_;

    const bool within = eval_.within_radius(distance_);
    const bool success = within && (stopped_ || !eval_.require_stop);
    if (stopped_ || success || rec.step + 1 >= cap_) done_ = true;
    if (!done_) observe();
    const policy::RewardSample now = sample();
    policy::RewardConfig rc = pipe_.reward;
    rc.type = policy::RewardType::R1;
    rec.r1 = policy::compute_reward(prev_sample_, now, success, rc);
    rc.type = policy::RewardType::R2;
    rec.r2 = policy::compute_reward(prev_sample_, now, success, rc);
    prev_sample_ = now;
    records_.push_back(std::move(rec));
    return records_.back();
  }

  EpisodeResult result_at(int n, int cap = -1) const {
    EpisodeResult r;
    r.spec = spec_;
    r.shortest = spec_.shortest_distance;
    r.steps_used = n;
    r.step_cap = cap < 0 ? cap_ : cap;
    const bool initial = n == 0;
    r.final_pose = initial ? spec_.start : records_[static_cast<std::size_t>(n - 1)].pose;
    r.path_length = initial ? 0.0 : records_[static_cast<std::size_t>(n - 1)].path_length;
    r.final_distance = initial ? field_.at(spec_.start, scene_.cell_size()) : records_[static_cast<std::size_t>(n - 1)].distance;
    r.stopped = !initial && records_[static_cast<std::size_t>(n - 1)].action == Action::Stop;
    r.success = eval_.within_radius(r.final_distance) && (r.stopped || !eval_.require_stop);
    return r;
  }

  const world::Scene& scene_;
  world::EpisodeSpec spec_;
  PipelineConfig pipe_;
  EvalConfig eval_;
  world::DistanceField field_;
  perception::SemanticMap global_;
  policy::GoalPolicy policy_;
  policy::LocalPlanner planner_;
  Rng det_rng_;
  enhance::EnhancementState enh_;
  world::AgentPose pose_;
  Frame frame_;
  std::vector<StepRecord> records_;
  std::vector<std::string> pending_events_;
  std::optional<policy::LongTermGoal> policy_goal_;
  std::optional<policy::LongTermGoal> active_override_;
  std::vector<int> target_floors_;
  std::optional<Action> prev_action_;
  bool prev_collided_ = false;
  bool arrived_ = false;
  bool stopped_ = false;
  bool done_ = false;
  double obstacle_distance_ = 0.0;
  double distance_ = 0.0;
  double path_length_ = 0.0;
  int cap_ = 0;
  int dynamic_cap_ = 0;
  int remaps_ = 0;
  policy::RewardSample prev_sample_;
};

}  // namespace objnav::eval
