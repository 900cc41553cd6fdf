#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

#include "objnav/world/sensor.hpp"

namespace objnav::perception {

inline constexpr int kObstacle = 0;
inline constexpr int kExplored = 1;
inline constexpr int kFirstCategory = 2;

// K x M x M binary top-down map, channel-major. Channel 0 is obstacle,
// channel 1 explored, channel 2 + c category c. `origin` is the world cell
// that map cell (0, 0) covers.
class SemanticMap {
 public:
  SemanticMap() = default;
  SemanticMap(int categories, int size, Cell origin, double cell_size)
      : c_(categories), m_(size), origin_(origin), cell_size_(cell_size),
        data_(static_cast<std::size_t>(categories + 2) * plane_of(size), 0) {
    if (categories < 1) throw ConfigError("semantic map needs at least one category");
    if (size < 1) throw ConfigError("semantic map size must be positive");
  }

  int categories() const { return c_; }
  int channels() const { return c_ + 2; }
  int size() const { return m_; }
  Cell origin() const { return origin_; }
  double cell_size() const { return cell_size_; }

  bool in_bounds(int r, int c) const { return r >= 0 && c >= 0 && r < m_ && c < m_; }
  bool in_bounds(Cell c) const { return in_bounds(c.row, c.col); }

  std::uint8_t get(int k, int r, int c) const { return data_[offset(k, r, c)]; }
  std::uint8_t get(int k, Cell c) const { return get(k, c.row, c.col); }
  bool obstacle(Cell c) const { return get(kObstacle, c) != 0; }
  bool explored(Cell c) const { return get(kExplored, c) != 0; }
  bool category(int cat, Cell c) const { return get(kFirstCategory + cat, c) != 0; }

  // Raw write; callers keep the explored-superset invariant.
  void put(int k, int r, int c, std::uint8_t v) { data_[offset(k, r, c)] = v; }

  void mark_explored(Cell c) { data_[offset(kExplored, c.row, c.col)] = 1; }
  void mark_obstacle(Cell c) {
    data_[offset(kObstacle, c.row, c.col)] = 1;
    mark_explored(c);
  }
  void mark_category(int cat, Cell c) {
    data_[offset(kFirstCategory + cat, c.row, c.col)] = 1;
    mark_explored(c);
  }

  std::uint8_t* channel(int k) { return data_.data() + static_cast<std::size_t>(k) * plane(); }
  const std::uint8_t* channel(int k) const { return data_.data() + static_cast<std::size_t>(k) * plane(); }
  const std::vector<std::uint8_t>& raw() const { return data_; }

  std::size_t plane() const { return plane_of(m_); }

  Cell to_map(Cell world) const { return Cell{world.row - origin_.row, world.col - origin_.col}; }
  Cell to_world(Cell map) const { return Cell{map.row + origin_.row, map.col + origin_.col}; }
  Cell agent_cell(const world::AgentPose& pose) const { return to_map(pose.cell(cell_size_)); }

  void clear() { std::fill(data_.begin(), data_.end(), std::uint8_t{0}); }

  std::size_t count(int k) const {
    const auto* p = channel(k);
    return static_cast<std::size_t>(std::count(p, p + plane(), std::uint8_t{1}));
  }

  double explored_area() const { return static_cast<double>(count(kExplored)) * cell_size_ * cell_size_; }

  bool operator==(const SemanticMap& o) const {
    return c_ == o.c_ && m_ == o.m_ && origin_ == o.origin_ && data_ == o.data_;
  }

 private:
  static std::size_t plane_of(int m) { return static_cast<std::size_t>(m) * static_cast<std::size_t>(m); }
  std::size_t offset(int k, int r, int c) const {
    return static_cast<std::size_t>(k) * plane() + static_cast<std::size_t>(r) * static_cast<std::size_t>(m_) +
           static_cast<std::size_t>(c);
  }

  int c_ = 0;
  int m_ = 0;
  Cell origin_;
  double cell_size_ = 0.05;
  std::vector<std::uint8_t> data_;
};

// Square global map covering the whole scene grid.
inline SemanticMap make_global_map(const world::Scene& scene, int categories) {
  int m = std::max(scene.width(), scene.height());
  if (m % 2 != 0) ++m;
  return SemanticMap(categories, m, Cell{0, 0}, scene.cell_size());
}

// M_local x M_local window whose cell (M_local/2, M_local/2) is the agent's
// cell. Cells outside the global map are unknown.
inline SemanticMap crop_local(const SemanticMap& global, const world::AgentPose& pose, int m_local) {
  if (m_local <= 0 || m_local % 2 != 0) throw ConfigError("local map size must be positive and even");
  const Cell agent = global.agent_cell(pose);
  const Cell off{agent.row - m_local / 2, agent.col - m_local / 2};
  SemanticMap local(global.categories(), m_local, global.to_world(off), global.cell_size());
  const int r_lo = std::max(0, -off.row), r_hi = std::min(m_local, global.size() - off.row);
  const int c_lo = std::max(0, -off.col), c_hi = std::min(m_local, global.size() - off.col);
  if (r_lo >= r_hi || c_lo >= c_hi) return local;
  for (int k = 0; k < global.channels(); ++k) {
    const std::uint8_t* src = global.channel(k);
    std::uint8_t* dst = local.channel(k);
    for (int r = r_lo; r < r_hi; ++r) {
      const std::uint8_t* s = src + static_cast<std::size_t>(r + off.row) * static_cast<std::size_t>(global.size()) +
                              static_cast<std::size_t>(c_lo + off.col);
      std::copy(s, s + (c_hi - c_lo),
                dst + static_cast<std::size_t>(r) * static_cast<std::size_t>(m_local) + static_cast<std::size_t>(c_lo));
    }
  }
  return local;
}

// Marks every cell pierced by each ray as explored; rays that returned mark
// their terminal cell as obstacle and, when labelled, as that category.
// Never clears a bit.
inline void project_to_map(SemanticMap& map, const world::Observation& obs,
                           const std::vector<std::optional<int>>& labels, const world::AgentPose& pose) {
  const double cs = map.cell_size();
  const Cell start = map.agent_cell(pose);
  if (map.in_bounds(start)) map.mark_explored(start);
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const double depth = obs.depth[i];
    const bool hit = obs.ray_hit(i);
    traverse_grid(pose.x, pose.y, obs.angles[i], cs, depth + 1e-9, [&](Cell, Cell to, double t) {
      const Cell m = map.to_map(to);
      const bool terminal = hit && t >= depth - 1e-9;
      if (map.in_bounds(m)) {
        if (terminal) {
          map.mark_obstacle(m);
          if (i < labels.size() && labels[i] && *labels[i] >= 0 && *labels[i] < map.categories())
            map.mark_category(*labels[i], m);
        } else if (t < depth) {
          map.mark_explored(m);
        }
      }
      return !terminal && t < depth;
    });
  }
}

}  // namespace objnav::perception
