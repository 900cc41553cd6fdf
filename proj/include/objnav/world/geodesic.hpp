#pragma once

#include <cmath>
#include <functional>
#include <queue>
#include <span>
#include <utility>
#include <vector>

#include "objnav/world/kinematics.hpp"

namespace objnav::world {

struct FloorCell {
  int floor = 0;
  Cell cell;
  auto operator<=>(const FloorCell&) const = default;
};

inline std::vector<FloorCell> category_cells(const Scene& scene, int category) {
  std::vector<FloorCell> out;
  for (const auto& o : scene.objects())
    if (o.category == category)
      for (const Cell& c : o.cells) out.push_back({o.floor, c});
  return out;
}

// Shortest 8-connected path length (diagonals cost sqrt(2) cells) from every
// traversable cell to the nearest source cell, following stair links.
// Source cells are path end points and need not be traversable themselves.
class DistanceField {
 public:
  DistanceField() = default;

  DistanceField(const Scene& scene, std::span<const FloorCell> sources)
      : width_(scene.width()), height_(scene.height()), floors_(scene.num_floors()) {
    const std::size_t plane = static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
    dist_.assign(plane * static_cast<std::size_t>(floors_), kInf);
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
    for (const auto& s : sources) {
      if (!scene.in_bounds(s.cell) || s.floor < 0 || s.floor >= floors_) continue;
      const std::size_t id = node(s.floor, s.cell);
      if (dist_[id] > 0.0) {
        dist_[id] = 0.0;
        open.push({0.0, id});
      }
    }
    const double straight = scene.cell_size();
    const double diagonal = scene.cell_size() * std::sqrt(2.0);
    static constexpr int kDr[8] = {-1, 1, 0, 0, -1, -1, 1, 1};
    static constexpr int kDc[8] = {0, 0, -1, 1, -1, 1, -1, 1};
    while (!open.empty()) {
      const auto [d, id] = open.top();
      open.pop();
      if (d > dist_[id]) continue;
      const int f = static_cast<int>(id / plane);
      const std::size_t rem = id % plane;
      const Cell p{static_cast<int>(rem / static_cast<std::size_t>(width_)),
                   static_cast<int>(rem % static_cast<std::size_t>(width_))};
      for (int k = 0; k < 8; ++k) {
        const Cell q{p.row + kDr[k], p.col + kDc[k]};
        if (!scene.in_bounds(q)) continue;
        const int nf = scene.transition(f, p, q);
        if (!scene.traversable(nf, q)) continue;
        const double nd = d + (k < 4 ? straight : diagonal);
        const std::size_t nid = node(nf, q);
        if (nd < dist_[nid]) {
          dist_[nid] = nd;
          open.push({nd, nid});
        }
      }
    }
  }

  double at(int floor, Cell c) const {
    if (floor < 0 || floor >= floors_ || c.row < 0 || c.col < 0 || c.row >= height_ || c.col >= width_) return kInf;
    return dist_[node(floor, c)];
  }

  double at(const AgentPose& pose, double cell_size) const { return at(pose.floor, pose.cell(cell_size)); }

 private:
  std::size_t node(int floor, Cell c) const {
    return (static_cast<std::size_t>(floor) * static_cast<std::size_t>(height_) + static_cast<std::size_t>(c.row)) *
               static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(c.col);
  }

  int width_ = 0;
  int height_ = 0;
  int floors_ = 0;
  std::vector<double> dist_;
};

inline double geodesic_distance(const Scene& scene, const AgentPose& from, std::span<const FloorCell> targets) {
  return DistanceField(scene, targets).at(from, scene.cell_size());
}

inline double geodesic_distance(const Scene& scene, const AgentPose& from, int category) {
  const auto cells = category_cells(scene, category);
  return geodesic_distance(scene, from, cells);
}

}  // namespace objnav::world
