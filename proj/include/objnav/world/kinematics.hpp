#pragma once

#include <algorithm>
#include <cmath>

#include "objnav/grid_ray.hpp"
#include "objnav/world/scene.hpp"

namespace objnav::world {

struct AgentPose {
  double x = 0.0;        // meters, along columns
  double y = 0.0;        // meters, along rows
  double heading = 0.0;  // degrees in [0, 360); TurnRight adds, TurnLeft subtracts
  int floor = 0;

  Cell cell(double cell_size) const { return cell_of(x, y, cell_size); }
  bool operator==(const AgentPose&) const = default;
};

struct MotionParams {
  double forward_step = 0.25;        // d, meters
  double turn_degrees = 30.0;        // theta
  double collision_lookahead = 0.1;  // clearance kept in front of the agent when blocked
  double probe_range = 10.0;         // cap on the reported obstacle distance

  void validate() const {
    if (!(forward_step > 0.0)) throw ConfigError("motion: forward_step must be > 0");
    if (!(turn_degrees > 0.0) || turn_degrees > 360.0) throw ConfigError("motion: turn_degrees must be in (0, 360]");
    const double turns = 360.0 / turn_degrees;
    if (std::abs(turns - std::round(turns)) > 1e-9) throw ConfigError("motion: turn_degrees must divide 360");
    if (collision_lookahead < 0.0) throw ConfigError("motion: collision_lookahead must be >= 0");
    if (!(probe_range > 0.0)) throw ConfigError("motion: probe_range must be > 0");
  }
};

inline bool pose_valid(const Scene& scene, const AgentPose& pose) {
  return scene.traversable(pose.floor, pose.cell(scene.cell_size())) && pose.heading >= 0.0 && pose.heading < 360.0;
}

struct RayHit {
  double distance = 0.0;  // meters to the first obstacle boundary, or max_range
  bool hit = false;
  Cell cell;              // obstacle cell entered (valid when hit)
  int floor = 0;          // floor the ray was on when it stopped
};

// Casts a ray on the scene grid, following stair links across floors.
// Leaving the grid counts as a hit at the grid boundary.
inline RayHit cast_ray(const Scene& scene, int floor, double x, double y, double angle_deg, double max_range) {
  RayHit out{max_range, false, Cell{}, floor};
  int cur_floor = floor;
  traverse_grid(x, y, angle_deg, scene.cell_size(), max_range, [&](Cell from, Cell to, double t) {
    if (t >= max_range) return false;
    cur_floor = scene.transition(cur_floor, from, to);
    if (scene.kind(cur_floor, to) == CellKind::Obstacle) {
      out = RayHit{std::max(t, 1e-9), true, to, cur_floor};
      return false;
    }
    return true;
  });
  if (!out.hit) out.floor = cur_floor;
  return out;
}

inline double obstacle_distance(const Scene& scene, const AgentPose& pose, double max_range) {
  return cast_ray(scene, pose.floor, pose.x, pose.y, pose.heading, max_range).distance;
}

struct StepOutcome {
  AgentPose pose;
  bool collided = false;
  double obstacle_distance = 0.0;  // free range along the new heading, capped at probe_range
  double displacement = 0.0;       // meters actually travelled
};

namespace detail {

// Floor of the cell containing the point `s` meters along the ray.
inline int floor_along(const Scene& scene, int floor, double x, double y, double angle_deg, double s) {
  const double a = deg_to_rad(angle_deg);
  const Cell target = cell_of(x + s * std::cos(a), y + s * std::sin(a), scene.cell_size());
  const Cell start = cell_of(x, y, scene.cell_size());
  if (target == start) return floor;
  int cur = floor;
  int result = floor;
  traverse_grid(x, y, angle_deg, scene.cell_size(), s + scene.cell_size(), [&](Cell from, Cell to, double t) {
    cur = scene.transition(cur, from, to);
    if (t <= s) result = cur;
    if (to == target) {
      result = cur;
      return false;
    }
    return true;
  });
  return result;
}

}  // namespace detail

inline StepOutcome step(const Scene& scene, const AgentPose& pose, Action action, const MotionParams& motion) {
  StepOutcome out;
  out.pose = pose;
  switch (action) {
    case Action::Stop:
      break;
    case Action::TurnLeft:
      out.pose.heading = normalize_degrees(pose.heading - motion.turn_degrees);
      break;
    case Action::TurnRight:
      out.pose.heading = normalize_degrees(pose.heading + motion.turn_degrees);
      break;
    case Action::Forward: {
      const double reach = motion.forward_step + motion.collision_lookahead;
      const RayHit ray = cast_ray(scene, pose.floor, pose.x, pose.y, pose.heading, reach);
      double s = motion.forward_step;
      if (ray.hit) {
        out.collided = true;
        s = std::max(0.0, ray.distance - std::max(motion.collision_lookahead, 1e-6));
      }
      if (s > 0.0) {
        const double a = deg_to_rad(pose.heading);
        AgentPose next = pose;
        next.x = pose.x + s * std::cos(a);
        next.y = pose.y + s * std::sin(a);
        next.floor = detail::floor_along(scene, pose.floor, pose.x, pose.y, pose.heading, s);
        if (scene.traversable(next.floor, next.cell(scene.cell_size()))) {
          out.pose = next;
          out.displacement = s;
        } else {
          out.collided = true;
        }
      }
      break;
    }
  }
  out.obstacle_distance = obstacle_distance(scene, out.pose, motion.probe_range);
  return out;
}

}  // namespace objnav::world
