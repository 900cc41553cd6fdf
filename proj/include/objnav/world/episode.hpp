#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "objnav/world/geodesic.hpp"

namespace objnav::world {

struct EpisodeSpec {
  std::string scene_id;
  AgentPose start;
  int goal_category = 0;
  double shortest_distance = 0.0;  // D, meters
  std::uint64_t seed = 0;
};

class NoValidStartError : public Error {
 public:
  using Error::Error;
};

struct SamplingOptions {
  double min_start_distance = 1.0;
  std::optional<int> start_floor;
  double heading_step = 30.0;  // start headings are multiples of this
};

// Free (non-stair) cells from which the goal category is reachable at
// geodesic distance >= min_start_distance, in row-major order per floor.
inline std::vector<FloorCell> eligible_starts(const Scene& scene, const DistanceField& field,
                                              const SamplingOptions& opts) {
  std::vector<FloorCell> out;
  for (int f = 0; f < scene.num_floors(); ++f) {
    if (opts.start_floor && *opts.start_floor != f) continue;
    for (int r = 0; r < scene.height(); ++r)
      for (int c = 0; c < scene.width(); ++c) {
        const Cell cell{r, c};
        if (scene.kind(f, cell) != CellKind::Free) continue;
        const double d = field.at(f, cell);
        if (std::isfinite(d) && d >= opts.min_start_distance) out.push_back({f, cell});
      }
  }
  return out;
}

inline EpisodeSpec sample_episode(const Scene& scene, int category, std::uint64_t seed,
                                  const SamplingOptions& opts = {}) {
  if (!scene.has_category(category))
    throw ConfigError("category " + std::to_string(category) + " is not present in scene " + scene.id());
  const auto targets = category_cells(scene, category);
  const DistanceField field(scene, targets);
  const auto eligible = eligible_starts(scene, field, opts);
  if (eligible.empty())
    throw NoValidStartError("no start cell in scene " + scene.id() + " is at least " +
                            std::to_string(opts.min_start_distance) + " m from category " + std::to_string(category));
  Rng rng(seed);
  const FloorCell pick = eligible[rng.uniform_int(eligible.size())];
  const auto headings = static_cast<std::uint64_t>(std::llround(360.0 / opts.heading_step));
  EpisodeSpec spec;
  spec.scene_id = scene.id();
  spec.start.x = cell_center_x(pick.cell, scene.cell_size());
  spec.start.y = cell_center_y(pick.cell, scene.cell_size());
  spec.start.heading = normalize_degrees(static_cast<double>(rng.uniform_int(headings)) * opts.heading_step);
  spec.start.floor = pick.floor;
  spec.goal_category = category;
  spec.shortest_distance = field.at(pick.floor, pick.cell);
  spec.seed = seed;
  return spec;
}

}  // namespace objnav::world
