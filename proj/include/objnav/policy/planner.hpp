#pragma once

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

#include "objnav/policy/goal.hpp"
#include "objnav/world/kinematics.hpp"

namespace objnav::policy {

struct PlannerConfig {
  double unknown_cost = 1.5;    // cost multiplier for entering unexplored cells
  double stop_radius = 0.5;     // meters; Stop is only issued for target goals
  double lookahead = 1.0;       // meters along the path searched for a visible waypoint
  int footprint_cells = 0;      // obstacle cells this close to the agent are ignored
  int goal_clearance_cells = 3; // obstacle cells this close to an obstacle goal are enterable
  int search_margin = 2;        // free ring kept around the explored area, in cells

  void validate() const {
    if (!(unknown_cost >= 1.0)) throw ConfigError("planner: unknown_cost must be >= 1");
    if (!(stop_radius >= 0.0)) throw ConfigError("planner: stop_radius must be >= 0");
    if (!(lookahead > 0.0)) throw ConfigError("planner: lookahead must be > 0");
    if (footprint_cells < 0 || goal_clearance_cells < 0) throw ConfigError("planner: clearances must be >= 0");
    if (search_margin < 1) throw ConfigError("planner: search_margin must be >= 1");
  }
};

struct PlanResult {
  Action action = Action::TurnLeft;
  double d_goal = kInf;  // weighted path cost to the goal, meters
  bool reachable = false;
  bool arrived = false;  // d_goal within stop_radius, whatever the goal source
  Cell waypoint;
  std::vector<Cell> path;  // agent cell first, goal cell last
};

// Continuous agent position in map cell units (col, row).
inline std::pair<double, double> map_position(const SemanticMap& map, const world::AgentPose& pose) {
  return {pose.x / map.cell_size() - map.origin().col, pose.y / map.cell_size() - map.origin().row};
}

// A* over the 8-connected local grid. Diagonal moves may not cut the corner
// of a blocked cell. Entering a cell costs its step length times 1 (explored)
// or unknown_cost (unexplored).
class LocalPlanner {
 public:
  explicit LocalPlanner(PlannerConfig cfg = {}) : cfg_(cfg) { cfg_.validate(); }

  const PlannerConfig& config() const { return cfg_; }

  bool blocked(const SemanticMap& map, Cell c, Cell agent, Cell goal) const {
    if (!map.in_bounds(c) || !map.obstacle(c)) return !map.in_bounds(c);
    if (chebyshev(c, agent) <= cfg_.footprint_cells) return false;
    if (map.obstacle(goal) && chebyshev(c, goal) <= cfg_.goal_clearance_cells) return false;
    return true;
  }

  // True when the straight segment from (x, y) (map cell units) to the centre
  // of `to` enters no obstacle cell outside the agent footprint.
  bool segment_clear(const SemanticMap& map, double x, double y, Cell to, Cell agent) const {
    const double tx = to.col + 0.5, ty = to.row + 0.5;
    const double len = std::hypot(tx - x, ty - y);
    if (len == 0.0) return true;
    const double ang = std::atan2(ty - y, tx - x) * 180.0 / kPi;
    bool clear = true;
    traverse_grid(x, y, ang, 1.0, len, [&](Cell, Cell next, double) {
      if (!map.in_bounds(next) || (map.obstacle(next) && chebyshev(next, agent) > cfg_.footprint_cells)) {
        clear = false;
        return false;
      }
      return next != to;
    });
    return clear;
  }

  PlanResult plan(const SemanticMap& map, const world::AgentPose& pose, const LongTermGoal& goal,
                  const world::MotionParams& motion) {
    PlanResult out;
    const Cell agent = map.agent_cell(pose);
    const Cell target{std::clamp(goal.cell.row, 0, map.size() - 1), std::clamp(goal.cell.col, 0, map.size() - 1)};
    out.waypoint = target;
    if (!map.in_bounds(agent)) return out;
    search(map, agent, target, out);
    if (!out.reachable) return out;

    out.arrived = out.d_goal <= cfg_.stop_radius;
    if (goal.source == GoalSource::TargetOverride && out.arrived) {
      out.action = Action::Stop;
      return out;
    }
    const auto [x, y] = map_position(map, pose);
    if (out.path.size() < 2) {
      out.action = Action::TurnLeft;
      return out;
    }
    // Furthest path cell within the lookahead that can be reached in a straight line.
    const double reach = cfg_.lookahead / map.cell_size();
    double along = 0.0;
    std::size_t pick = 0;
    for (std::size_t i = 1; i < out.path.size(); ++i) {
      along += (out.path[i].row != out.path[i - 1].row && out.path[i].col != out.path[i - 1].col) ? std::sqrt(2.0) : 1.0;
      if (i > 1 && along > reach) break;
      if (segment_clear(map, x, y, out.path[i], agent)) pick = i;
    }
    out.waypoint = out.path[std::max<std::size_t>(pick, 1)];
    const double desired = std::atan2(out.waypoint.row + 0.5 - y, out.waypoint.col + 0.5 - x) * 180.0 / kPi;
    const double err = angle_difference(desired, pose.heading);
    if (std::abs(err) >= 180.0 - 1e-9) out.action = Action::TurnLeft;
    else if (std::abs(err) > motion.turn_degrees / 2.0) out.action = err > 0.0 ? Action::TurnRight : Action::TurnLeft;
    else if (pick > 0) out.action = Action::Forward;
    else out.action = err > 0.0 ? Action::TurnRight : Action::TurnLeft;
    return out;
  }

 private:
  static int chebyshev(Cell a, Cell b) { return std::max(std::abs(a.row - b.row), std::abs(a.col - b.col)); }

  void search(const SemanticMap& map, Cell agent, Cell goal, PlanResult& out) {
    // Search box: explored area, agent and goal, plus a ring of unknown cells.
    const std::uint8_t* ex = map.channel(perception::kExplored);
    const int m = map.size();
    int r0 = std::min(agent.row, goal.row), r1 = std::max(agent.row, goal.row);
    int c0 = std::min(agent.col, goal.col), c1 = std::max(agent.col, goal.col);
    for (int r = 0; r < m; ++r) {
      const std::uint8_t* row = ex + static_cast<std::size_t>(r) * static_cast<std::size_t>(m);
      const auto* first = std::find(row, row + m, std::uint8_t{1});
      if (first == row + m) continue;
      int last = m - 1;
      while (!row[last]) --last;
      r0 = std::min(r0, r);
      r1 = std::max(r1, r);
      c0 = std::min(c0, static_cast<int>(first - row));
      c1 = std::max(c1, last);
    }
    r0 = std::max(0, r0 - cfg_.search_margin);
    c0 = std::max(0, c0 - cfg_.search_margin);
    r1 = std::min(m - 1, r1 + cfg_.search_margin);
    c1 = std::min(m - 1, c1 + cfg_.search_margin);
    const int h = r1 - r0 + 1, w = c1 - c0 + 1;
    const std::size_t n = static_cast<std::size_t>(h) * static_cast<std::size_t>(w);
    g_.assign(n, kInf);
    parent_.assign(n, -1);
    closed_.assign(n, 0);
    auto id = [&](Cell c) { return static_cast<std::size_t>(c.row - r0) * static_cast<std::size_t>(w) + static_cast<std::size_t>(c.col - c0); };
    auto cell = [&](std::size_t i) { return Cell{static_cast<int>(i / static_cast<std::size_t>(w)) + r0, static_cast<int>(i % static_cast<std::size_t>(w)) + c0}; };
    auto inside = [&](Cell c) { return c.row >= r0 && c.row <= r1 && c.col >= c0 && c.col <= c1; };
    auto heuristic = [&](Cell c) {
      const int dr = std::abs(c.row - goal.row), dc = std::abs(c.col - goal.col);
      return (std::max(dr, dc) - std::min(dr, dc)) + std::sqrt(2.0) * std::min(dr, dc);
    };
    auto is_blocked = [&](Cell c) { return !inside(c) || blocked(map, c, agent, goal); };

    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
    g_[id(agent)] = 0.0;
    open.push({heuristic(agent), id(agent)});
    static constexpr int kDr[8] = {-1, 1, 0, 0, -1, -1, 1, 1};
    static constexpr int kDc[8] = {0, 0, -1, 1, -1, 1, -1, 1};
    const std::size_t goal_id = id(goal);
    while (!open.empty()) {
      const auto [f, cur] = open.top();
      open.pop();
      if (closed_[cur]) continue;
      closed_[cur] = 1;
      if (cur == goal_id) break;
      const Cell p = cell(cur);
      for (int k = 0; k < 8; ++k) {
        const Cell q{p.row + kDr[k], p.col + kDc[k]};
        if (is_blocked(q)) continue;
        if (k >= 4 && (is_blocked(Cell{p.row + kDr[k], p.col}) || is_blocked(Cell{p.row, p.col + kDc[k]}))) continue;
        const std::size_t qi = id(q);
        if (closed_[qi]) continue;
        const double mult = map.explored(q) ? 1.0 : cfg_.unknown_cost;
        const double ng = g_[cur] + (k < 4 ? 1.0 : std::sqrt(2.0)) * mult;
        if (ng < g_[qi]) {
          g_[qi] = ng;
          parent_[qi] = static_cast<long long>(cur);
          open.push({ng + heuristic(q), qi});
        }
      }
    }
    if (!closed_[goal_id]) return;
    out.reachable = true;
    out.d_goal = g_[goal_id] * map.cell_size();
    for (long long i = static_cast<long long>(goal_id); i >= 0; i = parent_[static_cast<std::size_t>(i)])
      out.path.push_back(cell(static_cast<std::size_t>(i)));
    std::reverse(out.path.begin(), out.path.end());
  }

  PlannerConfig cfg_;
  std::vector<double> g_;
  std::vector<long long> parent_;
  std::vector<std::uint8_t> closed_;
};

inline PlanResult local_plan(const SemanticMap& map, const world::AgentPose& pose, const LongTermGoal& goal,
                             const world::MotionParams& motion, const PlannerConfig& cfg = {}) {
  LocalPlanner planner(cfg);
  return planner.plan(map, pose, goal, motion);
}

}  // namespace objnav::policy
