#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "objnav/core.hpp"

namespace objnav::world {

enum class CellKind : std::uint8_t { Free, Obstacle, Stair };

struct ObjectInstance {
  int category = 0;
  int floor = 0;
  std::vector<Cell> cells;
};

// A straight stair flight. region_a lives on floor_a, region_b on floor_b and
// the two rectangles share an edge. Stepping from region_a into region_b (on
// floor_a) lands on floor_b, and the reverse step returns to floor_a.
struct StairLink {
  int floor_a = 0;
  Rect region_a;
  int floor_b = 1;
  Rect region_b;
};

struct SceneData {
  std::string id;
  double cell_size = 0.05;
  int width = 0;
  int height = 0;
  std::vector<std::vector<CellKind>> floors;  // row-major, height * width each
  std::vector<ObjectInstance> objects;
  std::vector<StairLink> stair_links;
};

inline bool regions_adjacent(const Rect& a, const Rect& b) {
  const bool same_rows = a.r0 == b.r0 && a.r1 == b.r1;
  const bool same_cols = a.c0 == b.c0 && a.c1 == b.c1;
  return (same_rows && (b.c0 == a.c1 + 1 || b.c1 == a.c0 - 1)) ||
         (same_cols && (b.r0 == a.r1 + 1 || b.r1 == a.r0 - 1));
}

// Ground-truth world. Immutable once constructed; the constructor validates
// every invariant and throws InvariantError naming the first violated rule.
class Scene {
 public:
  Scene() = default;

  explicit Scene(SceneData data) : data_(std::move(data)) {
    validate_and_index();
  }

  const SceneData& data() const { return data_; }
  const std::string& id() const { return data_.id; }
  double cell_size() const { return data_.cell_size; }
  int width() const { return data_.width; }
  int height() const { return data_.height; }
  int num_floors() const { return static_cast<int>(data_.floors.size()); }
  const std::vector<ObjectInstance>& objects() const { return data_.objects; }
  const std::vector<StairLink>& stair_links() const { return data_.stair_links; }

  bool in_bounds(Cell c) const {
    return c.row >= 0 && c.col >= 0 && c.row < data_.height && c.col < data_.width;
  }

  std::size_t index(Cell c) const {
    return static_cast<std::size_t>(c.row) * static_cast<std::size_t>(data_.width) + static_cast<std::size_t>(c.col);
  }

  // Cells outside the grid behave as obstacles.
  CellKind kind(int floor, Cell c) const {
    if (!in_bounds(c) || floor < 0 || floor >= num_floors()) return CellKind::Obstacle;
    return data_.floors[static_cast<std::size_t>(floor)][index(c)];
  }

  bool traversable(int floor, Cell c) const { return kind(floor, c) != CellKind::Obstacle; }

  // Index into objects(), or -1.
  int object_at(int floor, Cell c) const {
    if (!in_bounds(c) || floor < 0 || floor >= num_floors()) return -1;
    return object_index_[static_cast<std::size_t>(floor)][index(c)];
  }

  std::optional<int> category_at(int floor, Cell c) const {
    const int o = object_at(floor, c);
    if (o < 0) return std::nullopt;
    return data_.objects[static_cast<std::size_t>(o)].category;
  }

  // Floor after moving from cell `from` to the neighbouring cell `to` while on `floor`.
  int transition(int floor, Cell from, Cell to) const {
    if (!in_bounds(from) || floor < 0 || floor >= num_floors()) return floor;
    const int slot = link_slot_[static_cast<std::size_t>(floor)][index(from)];
    if (slot < 0) return floor;
    const StairLink& link = data_.stair_links[static_cast<std::size_t>(slot / 2)];
    if (slot % 2 == 0) return link.region_b.contains(to) ? link.floor_b : floor;
    return link.region_a.contains(to) ? link.floor_a : floor;
  }

  bool has_category(int category) const {
    return std::any_of(data_.objects.begin(), data_.objects.end(),
                       [&](const ObjectInstance& o) { return o.category == category; });
  }

  // Largest category id present plus one.
  int category_bound() const {
    int m = 0;
    for (const auto& o : data_.objects) m = std::max(m, o.category + 1);
    return m;
  }

  std::vector<int> floors_with_category(int category) const {
    std::vector<int> out;
    for (const auto& o : data_.objects)
      if (o.category == category && std::find(out.begin(), out.end(), o.floor) == out.end()) out.push_back(o.floor);
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  void validate_and_index() {
    const auto& d = data_;
    if (!(d.cell_size > 0.0) || !std::isfinite(d.cell_size))
      throw InvariantError("cell-size", "cell_size must be positive and finite");
    if (d.width <= 0 || d.height <= 0) throw InvariantError("floor-dimensions", "width and height must be positive");
    if (d.floors.empty()) throw InvariantError("floor-dimensions", "scene has no floors");
    const std::size_t n = static_cast<std::size_t>(d.width) * static_cast<std::size_t>(d.height);
    for (std::size_t f = 0; f < d.floors.size(); ++f)
      if (d.floors[f].size() != n)
        throw InvariantError("floor-dimensions", "floor " + std::to_string(f) + " does not match " +
                                                     std::to_string(d.width) + "x" + std::to_string(d.height));

    object_index_.assign(d.floors.size(), std::vector<int>(n, -1));
    for (std::size_t i = 0; i < d.objects.size(); ++i) {
      const auto& o = d.objects[i];
      const std::string tag = "object " + std::to_string(i);
      if (o.category < 0) throw InvariantError("object-category", tag + " has negative category");
      if (o.floor < 0 || o.floor >= num_floors())
        throw InvariantError("object-floor", tag + " references nonexistent floor " + std::to_string(o.floor));
      if (o.cells.empty()) throw InvariantError("object-nonempty", tag + " has no cells");
      for (const Cell& c : o.cells) {
        if (!in_bounds(c)) throw InvariantError("object-cell-bounds", tag + " has a cell outside the grid");
        if (kind(o.floor, c) == CellKind::Stair)
          throw InvariantError("object-cell-kind", tag + " lies on a stair cell");
        int& slot = object_index_[static_cast<std::size_t>(o.floor)][index(c)];
        if (slot >= 0) throw InvariantError("object-overlap", tag + " overlaps object " + std::to_string(slot));
        slot = static_cast<int>(i);
      }
    }

    link_slot_.assign(d.floors.size(), std::vector<int>(n, -1));
    for (std::size_t i = 0; i < d.stair_links.size(); ++i) {
      const auto& l = d.stair_links[i];
      const std::string tag = "stair link " + std::to_string(i);
      if (l.floor_a < 0 || l.floor_a >= num_floors() || l.floor_b < 0 || l.floor_b >= num_floors() ||
          l.floor_a == l.floor_b)
        throw InvariantError("stair-floor", tag + " must join two distinct existing floors");
      const std::pair<int, const Rect*> sides[2] = {{l.floor_a, &l.region_a}, {l.floor_b, &l.region_b}};
      for (int s = 0; s < 2; ++s) {
        const auto [floor, region] = sides[s];
        if (region->empty()) throw InvariantError("stair-region-nonempty", tag + " has an empty region");
        if (!in_bounds({region->r0, region->c0}) || !in_bounds({region->r1, region->c1}))
          throw InvariantError("stair-region-bounds", tag + " region lies outside the grid");
        for (int r = region->r0; r <= region->r1; ++r)
          for (int c = region->c0; c <= region->c1; ++c) {
            if (kind(floor, {r, c}) != CellKind::Stair)
              throw InvariantError("stair-region-kind", tag + " region contains a non-stair cell");
            int& slot = link_slot_[static_cast<std::size_t>(floor)][index({r, c})];
            if (slot >= 0) throw InvariantError("stair-region-overlap", tag + " overlaps another stair region");
            slot = static_cast<int>(i) * 2 + s;
          }
      }
      if (!regions_adjacent(l.region_a, l.region_b))
        throw InvariantError("stair-region-adjacency", tag + " regions must share a full edge");
    }
  }

  SceneData data_;
  std::vector<std::vector<int>> object_index_;
  std::vector<std::vector<int>> link_slot_;
};

}  // namespace objnav::world
