#pragma once

#include <optional>
#include <vector>

#include "objnav/world/kinematics.hpp"

namespace objnav::world {

// Horizontal depth + semantic scan.
struct SensorConfig {
  double fov_degrees = 79.0;
  int ray_count = 41;
  double max_range = 5.0;

  void validate() const {
    if (!(fov_degrees > 0.0) || fov_degrees > 360.0) throw ConfigError("sensor: fov_degrees must be in (0, 360]");
    if (ray_count < 2) throw ConfigError("sensor: ray_count must be >= 2");
    if (!(max_range > 0.0)) throw ConfigError("sensor: max_range must be > 0");
  }

  double ray_angle(const AgentPose& pose, int i) const {
    return pose.heading - fov_degrees / 2.0 + i * fov_degrees / (ray_count - 1);
  }
};

struct Observation {
  std::vector<double> depth;                    // (0, max_range]; max_range means no return
  std::vector<std::optional<int>> true_labels;  // category of the object hit, if any
  std::vector<double> angles;                   // world-frame ray angles, degrees
  AgentPose pose_reading;
  double max_range = 0.0;

  std::size_t size() const { return depth.size(); }
  bool ray_hit(std::size_t i) const { return depth[i] < max_range; }
};

inline Observation render_observation(const Scene& scene, const AgentPose& pose, const SensorConfig& sensor) {
  Observation obs;
  obs.pose_reading = pose;
  obs.max_range = sensor.max_range;
  const auto n = static_cast<std::size_t>(sensor.ray_count);
  obs.depth.reserve(n);
  obs.true_labels.reserve(n);
  obs.angles.reserve(n);
  for (int i = 0; i < sensor.ray_count; ++i) {
    const double angle = sensor.ray_angle(pose, i);
    const RayHit hit = cast_ray(scene, pose.floor, pose.x, pose.y, angle, sensor.max_range);
    obs.angles.push_back(angle);
    obs.depth.push_back(hit.distance);
    obs.true_labels.push_back(hit.hit ? scene.category_at(hit.floor, hit.cell) : std::nullopt);
  }
  return obs;
}

}  // namespace objnav::world
