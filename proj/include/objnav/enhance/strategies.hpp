#pragma once

#include <cmath>
#include <optional>

#include "objnav/policy/goal.hpp"

namespace objnav::enhance {

using policy::LongTermGoal;

struct EnhancementConfig {
  double tau_coll = 0.20;        // meters
  int tau_block = 4;             // readings
  int f_update = 25;             // steps between policy predictions
  double tau_unreachable = 12.0; // meters
  double tau_reached = 0.5;      // meters
  int stair_dwell_threshold = 15;
  bool untrap = false;
  bool dynamic_goal = false;
  bool remap = false;

  void validate() const {
    if (!(tau_coll > 0.0) || tau_block < 1 || f_update < 1 || !(tau_reached > 0.0) || stair_dwell_threshold < 1)
      throw ConfigError("enhance: thresholds must be > 0");
    if (!(tau_reached < tau_unreachable)) throw ConfigError("enhance: tau_reached must be < tau_unreachable");
  }
};

enum class UntrapPhase : std::uint8_t { Inactive, Turning, Advancing };
enum class TurnParity : std::uint8_t { Left, Right };

struct EnhancementState {
  int blocked_count = 0;
  UntrapPhase untrap_phase = UntrapPhase::Inactive;
  TurnParity turn_parity = TurnParity::Left;  // direction of the next turn override
  std::optional<LongTermGoal> goal_collector;
  std::optional<LongTermGoal> current_goal;
  int stair_dwell = 0;
};

// Called once per step with the action taken on the previous step, whether
// it collided, and the obstacle distance read after it. A Forward that
// completed without collision clears the count before the new reading counts,
// and so does the Forward that closes an activation, which hands control back
// to the caller until the count builds up again.
inline std::optional<Action> untrap_step(std::optional<Action> prev_action, bool prev_collided,
                                         double obstacle_distance, EnhancementState& st,
                                         const EnhancementConfig& cfg) {
  if (prev_action == Action::Forward && (!prev_collided || st.untrap_phase == UntrapPhase::Advancing))
    st.blocked_count = 0;
  if (obstacle_distance < cfg.tau_coll) ++st.blocked_count;
  if (st.blocked_count < cfg.tau_block) {
    st.untrap_phase = UntrapPhase::Inactive;
    return std::nullopt;
  }
  if (prev_action == Action::Forward) {
    const Action turn = st.turn_parity == TurnParity::Left ? Action::TurnLeft : Action::TurnRight;
    st.turn_parity = st.turn_parity == TurnParity::Left ? TurnParity::Right : TurnParity::Left;
    st.untrap_phase = UntrapPhase::Turning;
    return turn;
  }
  st.untrap_phase = UntrapPhase::Advancing;
  return Action::Forward;
}

// Holds the current goal until it is reached or looks unreachable. Pass a
// prediction on every step where step % f_update == 0; d_goal is the planner
// distance to the current goal (NaN when there is none yet).
inline LongTermGoal dynamic_goal_select(int step, const std::optional<LongTermGoal>& prediction, double d_goal,
                                        EnhancementState& st, const EnhancementConfig& cfg) {
  if (step % cfg.f_update == 0) {
    if (!prediction) throw InvariantError("dynamic-goal-prediction", "no policy prediction on an update step");
    st.goal_collector = prediction;
    if (!st.current_goal) st.current_goal = prediction;
  }
  if (!st.current_goal) throw InvariantError("missing-initial-goal", "queried before any prediction");
  if (st.goal_collector && (d_goal > cfg.tau_unreachable || d_goal < cfg.tau_reached)) st.current_goal = st.goal_collector;
  return *st.current_goal;
}

// True when the agent has just spent stair_dwell_threshold consecutive steps
// on stair cells; the caller then clears the map.
inline bool remap_check(bool on_stair, EnhancementState& st, const EnhancementConfig& cfg) {
  st.stair_dwell = on_stair ? st.stair_dwell + 1 : 0;
  if (st.stair_dwell < cfg.stair_dwell_threshold) return false;
  st.stair_dwell = 0;
  return true;
}

}  // namespace objnav::enhance
