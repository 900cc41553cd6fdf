#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "objnav/eval/session.hpp"

namespace objnav::eval {

// What the failure rules need beyond the result and its steps.
struct FailureEvidence {
  std::vector<int> target_floors;
  bool spurious_target_mapped = false;
  bool untrap_enabled = false;
};

inline bool has_event(const StepRecord& s, std::string_view e) {
  return std::find(s.events.begin(), s.events.end(), e) != s.events.end();
}

// Deterministic rule cascade; nullopt for successful episodes. `steps` are
// the steps that count toward `r` (a prefix of the trajectory).
inline std::optional<FailureLabel> classify_failure(const EpisodeResult& r, std::span<const StepRecord> steps,
                                                    const FailureEvidence& ev, const EvalConfig& cfg) {
  if (r.success) return std::nullopt;
  const FailureRules& fr = cfg.failure;
  const bool target_mapped = std::any_of(steps.begin(), steps.end(), [](const StepRecord& s) { return s.target_mapped; });
  if (r.final_distance <= cfg.success_radius + fr.near_miss_slack && target_mapped)
    return FailureLabel::FalseNegativeSuccess;
  if (std::any_of(steps.begin(), steps.end(), [](const StepRecord& s) { return has_event(s, "override:false"); }))
    return FailureLabel::Misdetection;
  if (std::find(ev.target_floors.begin(), ev.target_floors.end(), r.final_pose.floor) == ev.target_floors.end())
    return FailureLabel::WrongFloor;
  const std::size_t window = std::min(steps.size(), static_cast<std::size_t>(fr.trapped_window));
  const auto tail = steps.subspan(steps.size() - window);
  if (ev.untrap_enabled) {
    const auto n = std::count_if(tail.begin(), tail.end(), [](const StepRecord& s) { return s.untrap_override; });
    if (n > fr.trapped_activations) return FailureLabel::Trapped;
  } else {
    const auto n = std::count_if(tail.begin(), tail.end(), [](const StepRecord& s) { return s.collided; });
    if (n >= fr.trapped_collisions) return FailureLabel::Trapped;
  }
  if (target_mapped) {
    const auto near = std::count_if(steps.begin(), steps.end(), [&](const StepRecord& s) {
      return s.goal && s.goal->source == policy::GoalSource::TargetOverride && s.d_goal < fr.no_stop_distance;
    });
    if (near >= fr.no_stop_steps) return FailureLabel::NoStopNearTarget;
  }
  if (ev.spurious_target_mapped) return FailureLabel::MapError;
  return FailureLabel::IncompleteExploration;
}

struct EpisodeOutcome {
  EpisodeResult fixed;                    // under the session's own cap
  std::optional<EpisodeResult> dynamic;   // same trajectory cut at the dynamic budget (mode Both)
  std::vector<StepRecord> steps;
  FailureEvidence evidence;
};

inline FailureEvidence collect_evidence(const EpisodeSession& s) {
  return {s.target_floors(), s.spurious_target_mapped(s.eval_config().failure.map_error_radius),
          s.pipeline().enhance.untrap};
}

// Results for a finished session, classified against `steps` (the session's
// own records, or the same trajectory as read back from a log).
inline EpisodeOutcome summarize(const EpisodeSession& s, std::vector<StepRecord> steps) {
  EpisodeOutcome out;
  out.steps = std::move(steps);
  out.evidence = collect_evidence(s);
  const EvalConfig& cfg = s.eval_config();
  out.fixed = s.result();
  out.fixed.failure_label = classify_failure(out.fixed, out.steps, out.evidence, cfg);
  if (cfg.mode == EvalMode::Both) {
    EpisodeResult d = s.dynamic_result();
    d.failure_label = classify_failure(d, std::span(out.steps).first(static_cast<std::size_t>(d.steps_used)),
                                       out.evidence, cfg);
    out.dynamic = d;
  }
  return out;
}

inline EpisodeOutcome summarize(const EpisodeSession& s) { return summarize(s, s.records()); }

inline EpisodeOutcome run_episode(const world::Scene& scene, const world::EpisodeSpec& spec,
                                  const PipelineConfig& pipe, const EvalConfig& eval) {
  EpisodeSession session(scene, spec, pipe, eval);
  while (!session.done()) session.agent_step();
  return summarize(session);
}

}  // namespace objnav::eval
