#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "objnav/world/scene.hpp"

namespace objnav::world {

struct GenerationParams {
  int floors = 1;
  int rooms_per_floor = 4;
  double corridor_width = 0.9;     // regular door opening, meters
  double object_density = 1.5;     // category objects per room
  int categories = 6;              // C
  std::uint64_t rng_seed = 0;

  double room_size = 3.5;          // nominal room edge, meters
  double min_room = 1.5;
  double cell_size = 0.05;
  int wall_cells = 2;
  double narrow_door_width = 0.3;  // narrow passages, meters
  double narrow_door_prob = 0.0;
  int clutter_per_room = 0;        // uncategorised pillars
  double stair_length = 2.0;       // length of each half of a flight
  double stair_width = 1.0;
  bool partition_categories_by_floor = false;  // category c only on floor c % floors
  int max_retries = 25;

  void validate() const {
    if (floors < 1) throw ConfigError("generate: floors must be >= 1");
    if (rooms_per_floor < 1) throw ConfigError("generate: rooms_per_floor must be >= 1");
    if (!(corridor_width > 0.0)) throw ConfigError("generate: corridor_width must be > 0");
    if (object_density < 0.0) throw ConfigError("generate: object_density must be >= 0");
    if (categories < 1) throw ConfigError("generate: categories must be >= 1");
    if (!(room_size > 0.0) || !(min_room > 0.0) || !(cell_size > 0.0))
      throw ConfigError("generate: sizes must be positive");
    if (wall_cells < 1) throw ConfigError("generate: wall_cells must be >= 1");
    if (narrow_door_prob < 0.0 || narrow_door_prob > 1.0)
      throw ConfigError("generate: narrow_door_prob must be in [0, 1]");
    if (clutter_per_room < 0) throw ConfigError("generate: clutter_per_room must be >= 0");
    if (max_retries < 1) throw ConfigError("generate: max_retries must be >= 1");
  }
};

class GenerationError : public Error {
 public:
  using Error::Error;
};

namespace gen_detail {

struct Grid {
  int width = 0;
  int height = 0;
  std::vector<CellKind> kind;
  std::vector<std::uint8_t> reserved;

  Grid(int w, int h) : width(w), height(h), kind(static_cast<std::size_t>(w * h), CellKind::Obstacle),
                       reserved(static_cast<std::size_t>(w * h), 0) {}

  bool in(int r, int c) const { return r >= 0 && c >= 0 && r < height && c < width; }
  CellKind& at(int r, int c) { return kind[static_cast<std::size_t>(r * width + c)]; }
  CellKind at(int r, int c) const { return kind[static_cast<std::size_t>(r * width + c)]; }
  std::uint8_t& res(int r, int c) { return reserved[static_cast<std::size_t>(r * width + c)]; }

  void fill(const Rect& rc, CellKind k) {
    for (int r = rc.r0; r <= rc.r1; ++r)
      for (int c = rc.c0; c <= rc.c1; ++c) at(r, c) = k;
  }
  void reserve(const Rect& rc, int margin) {
    for (int r = rc.r0 - margin; r <= rc.r1 + margin; ++r)
      for (int c = rc.c0 - margin; c <= rc.c1 + margin; ++c)
        if (in(r, c)) res(r, c) = 1;
  }
  bool all_free_unreserved(const Rect& rc) const {
    for (int r = rc.r0; r <= rc.r1; ++r)
      for (int c = rc.c0; c <= rc.c1; ++c) {
        if (!in(r, c) || at(r, c) != CellKind::Free) return false;
        if (reserved[static_cast<std::size_t>(r * width + c)]) return false;
      }
    return true;
  }
};

// 4-connected flood fill: every non-obstacle cell must be reachable.
inline bool connected(const Grid& g) {
  std::vector<std::uint8_t> seen(g.kind.size(), 0);
  std::vector<int> stack;
  std::size_t open_cells = 0;
  int seed = -1;
  for (std::size_t i = 0; i < g.kind.size(); ++i)
    if (g.kind[i] != CellKind::Obstacle) {
      ++open_cells;
      if (seed < 0) seed = static_cast<int>(i);
    }
  if (seed < 0) return false;
  stack.push_back(seed);
  seen[static_cast<std::size_t>(seed)] = 1;
  std::size_t reached = 0;
  while (!stack.empty()) {
    const int id = stack.back();
    stack.pop_back();
    ++reached;
    const int r = id / g.width, c = id % g.width;
    const int nr[4] = {r - 1, r + 1, r, r};
    const int nc[4] = {c, c, c - 1, c + 1};
    for (int k = 0; k < 4; ++k) {
      if (!g.in(nr[k], nc[k])) continue;
      const int nid = nr[k] * g.width + nc[k];
      if (seen[static_cast<std::size_t>(nid)] || g.kind[static_cast<std::size_t>(nid)] == CellKind::Obstacle) continue;
      seen[static_cast<std::size_t>(nid)] = 1;
      stack.push_back(nid);
    }
  }
  return reached == open_cells;
}

inline int cells(double meters, double cell_size) { return std::max(1, static_cast<int>(std::lround(meters / cell_size))); }

inline int uniform_between(Rng& rng, int lo, int hi) {
  if (hi <= lo) return lo;
  return lo + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(hi - lo + 1)));
}

struct Layout {
  std::vector<Rect> rooms;
};

// Binary space partition into rooms, then one door per partition wall.
inline bool build_rooms(Grid& g, Layout& layout, const GenerationParams& p, Rng& rng) {
  const int wall = p.wall_cells;
  const int min_room = cells(p.min_room, p.cell_size);
  g.fill(Rect{wall, wall, g.height - 1 - wall, g.width - 1 - wall}, CellKind::Free);
  layout.rooms = {Rect{wall, wall, g.height - 1 - wall, g.width - 1 - wall}};
  struct Split {
    bool vertical;
    Rect wall;
  };
  std::vector<Split> splits;
  while (static_cast<int>(layout.rooms.size()) < p.rooms_per_floor) {
    auto largest = std::max_element(layout.rooms.begin(), layout.rooms.end(), [](const Rect& a, const Rect& b) {
      return a.rows() * a.cols() < b.rows() * b.cols();
    });
    const Rect room = *largest;
    const bool vertical = room.cols() >= room.rows();
    const int len = vertical ? room.cols() : room.rows();
    if (len < 2 * min_room + wall) break;
    const int lo = std::max(min_room, static_cast<int>(len * 0.35));
    const int hi = std::min(len - min_room - wall, static_cast<int>(len * 0.65));
    const int at = uniform_between(rng, lo, std::max(lo, hi));
    Rect w, a, b;
    if (vertical) {
      w = Rect{room.r0, room.c0 + at, room.r1, room.c0 + at + wall - 1};
      a = Rect{room.r0, room.c0, room.r1, w.c0 - 1};
      b = Rect{room.r0, w.c1 + 1, room.r1, room.c1};
    } else {
      w = Rect{room.r0 + at, room.c0, room.r0 + at + wall - 1, room.c1};
      a = Rect{room.r0, room.c0, w.r0 - 1, room.c1};
      b = Rect{w.r1 + 1, room.c0, room.r1, room.c1};
    }
    g.fill(w, CellKind::Obstacle);
    splits.push_back({vertical, w});
    *largest = a;
    layout.rooms.push_back(b);
  }

  for (const Split& s : splits) {
    const bool narrow = rng.bernoulli(p.narrow_door_prob);
    const int width = cells(narrow ? p.narrow_door_width : p.corridor_width, p.cell_size);
    const int len = s.vertical ? s.wall.rows() : s.wall.cols();
    std::vector<int> starts;
    for (int off = 1; off + width + 1 <= len; ++off) {
      bool ok = true;
      for (int i = -1; i <= width && ok; ++i) {
        const int pos = off + i;
        if (s.vertical) {
          const int r = s.wall.r0 + pos;
          ok = g.at(r, s.wall.c0 - 1) == CellKind::Free && g.at(r, s.wall.c1 + 1) == CellKind::Free;
        } else {
          const int c = s.wall.c0 + pos;
          ok = g.at(s.wall.r0 - 1, c) == CellKind::Free && g.at(s.wall.r1 + 1, c) == CellKind::Free;
        }
      }
      if (ok) starts.push_back(off);
    }
    if (starts.empty()) return false;
    const int off = starts[rng.uniform_int(starts.size())];
    Rect door = s.vertical ? Rect{s.wall.r0 + off, s.wall.c0, s.wall.r0 + off + width - 1, s.wall.c1}
                           : Rect{s.wall.r0, s.wall.c0 + off, s.wall.r1, s.wall.c0 + off + width - 1};
    g.fill(door, CellKind::Free);
    g.reserve(door, 4);
  }
  return connected(g);
}

struct Flight {
  Rect region_a, region_b;
  Rect walls[2];
  Rect entry, exit;  // landings in front of region_a (lower floor) and past region_b (upper floor)
};

inline Flight make_flight(int r, int c, int length, int width, int wall, int dir) {
  // dir: 0 east, 1 west, 2 south, 3 north. The flight rises from region_a to region_b.
  Flight f;
  const int landing = 3;
  if (dir <= 1) {
    const Rect west{r, c, r + width - 1, c + length - 1};
    const Rect east{r, c + length, r + width - 1, c + 2 * length - 1};
    f.region_a = dir == 0 ? west : east;
    f.region_b = dir == 0 ? east : west;
    f.walls[0] = Rect{r - wall, c, r - 1, c + 2 * length - 1};
    f.walls[1] = Rect{r + width, c, r + width + wall - 1, c + 2 * length - 1};
    const Rect west_landing{r, c - landing, r + width - 1, c - 1};
    const Rect east_landing{r, c + 2 * length, r + width - 1, c + 2 * length + landing - 1};
    f.entry = dir == 0 ? west_landing : east_landing;
    f.exit = dir == 0 ? east_landing : west_landing;
  } else {
    const Rect north{r, c, r + length - 1, c + width - 1};
    const Rect south{r + length, c, r + 2 * length - 1, c + width - 1};
    f.region_a = dir == 2 ? north : south;
    f.region_b = dir == 2 ? south : north;
    f.walls[0] = Rect{r, c - wall, r + 2 * length - 1, c - 1};
    f.walls[1] = Rect{r, c + width, r + 2 * length - 1, c + width + wall - 1};
    const Rect north_landing{r - landing, c, r - 1, c + width - 1};
    const Rect south_landing{r + 2 * length, c, r + 2 * length + landing - 1, c + width - 1};
    f.entry = dir == 2 ? north_landing : south_landing;
    f.exit = dir == 2 ? south_landing : north_landing;
  }
  return f;
}

inline bool inside(const Grid& g, const Rect& rc, int margin) {
  return rc.r0 >= margin && rc.c0 >= margin && rc.r1 < g.height - margin && rc.c1 < g.width - margin;
}

inline bool place_stairs(Grid& lower, Grid& upper, const GenerationParams& p, Rng& rng, StairLink& link,
                         int lower_floor) {
  const int length = cells(p.stair_length, p.cell_size);
  const int width = cells(p.stair_width, p.cell_size);
  const int wall = p.wall_cells;
  for (int attempt = 0; attempt < 400; ++attempt) {
    const int dir = static_cast<int>(rng.uniform_int(4));
    const int r = uniform_between(rng, 0, lower.height - 1);
    const int c = uniform_between(rng, 0, lower.width - 1);
    const Flight f = make_flight(r, c, length, width, wall, dir);
    const Rect all{std::min({f.walls[0].r0, f.entry.r0, f.exit.r0}), std::min({f.walls[0].c0, f.entry.c0, f.exit.c0}),
                   std::max({f.walls[1].r1, f.entry.r1, f.exit.r1}), std::max({f.walls[1].c1, f.entry.c1, f.exit.c1})};
    if (!inside(lower, all, wall)) continue;
    if (!lower.all_free_unreserved(f.entry) || !upper.all_free_unreserved(f.exit)) continue;
    Grid lo = lower, up = upper;
    for (Grid* g : {&lo, &up}) {
      g->fill(f.walls[0], CellKind::Obstacle);
      g->fill(f.walls[1], CellKind::Obstacle);
    }
    lo.fill(f.region_a, CellKind::Stair);
    lo.fill(f.region_b, CellKind::Obstacle);
    up.fill(f.region_a, CellKind::Obstacle);
    up.fill(f.region_b, CellKind::Stair);
    if (!connected(lo) || !connected(up)) continue;
    for (Grid* g : {&lo, &up}) {
      g->reserve(f.region_a, 4);
      g->reserve(f.region_b, 4);
      g->reserve(f.entry, 4);
      g->reserve(f.exit, 4);
    }
    lower = std::move(lo);
    upper = std::move(up);
    link = StairLink{lower_floor, f.region_a, lower_floor + 1, f.region_b};
    return true;
  }
  return false;
}

// Places an obstacle block inside a random room; rejects placements that
// touch reserved cells or disconnect the floor.
inline bool place_block(Grid& g, const Layout& layout, Rng& rng, int min_cells, int max_cells, Rect& out) {
  for (int attempt = 0; attempt < 60; ++attempt) {
    const Rect& room = layout.rooms[rng.uniform_int(layout.rooms.size())];
    const int h = uniform_between(rng, min_cells, max_cells);
    const int w = uniform_between(rng, min_cells, max_cells);
    if (h + 2 > room.rows() || w + 2 > room.cols()) continue;
    const int r = uniform_between(rng, room.r0, room.r1 - h + 1);
    const int c = uniform_between(rng, room.c0, room.c1 - w + 1);
    const Rect block{r, c, r + h - 1, c + w - 1};
    if (!g.all_free_unreserved(block)) continue;
    g.fill(block, CellKind::Obstacle);
    if (!connected(g)) {
      g.fill(block, CellKind::Free);
      continue;
    }
    g.reserve(block, 0);
    out = block;
    return true;
  }
  return false;
}

inline bool attempt(const GenerationParams& p, Rng& rng, SceneData& out) {
  const int wall = p.wall_cells;
  const int side = cells(std::sqrt(static_cast<double>(p.rooms_per_floor)) * p.room_size, p.cell_size) + 2 * wall;
  std::vector<Grid> grids;
  std::vector<Layout> layouts;
  for (int f = 0; f < p.floors; ++f) {
    Grid g(side, side);
    Layout layout;
    if (!build_rooms(g, layout, p, rng)) return false;
    grids.push_back(std::move(g));
    layouts.push_back(std::move(layout));
  }

  out = SceneData{};
  out.cell_size = p.cell_size;
  out.width = side;
  out.height = side;
  for (int f = 0; f + 1 < p.floors; ++f) {
    StairLink link;
    if (!place_stairs(grids[static_cast<std::size_t>(f)], grids[static_cast<std::size_t>(f + 1)], p, rng, link, f))
      return false;
    out.stair_links.push_back(link);
  }

  const int per_floor = static_cast<int>(std::lround(p.object_density * p.rooms_per_floor));
  const int min_obj = cells(0.3, p.cell_size);
  const int max_obj = cells(0.8, p.cell_size);
  for (int f = 0; f < p.floors; ++f) {
    std::vector<int> cats;
    for (int c = 0; c < p.categories; ++c)
      if (!p.partition_categories_by_floor || c % p.floors == f) cats.push_back(c);
    if (cats.empty()) continue;
    const std::size_t offset = rng.uniform_int(cats.size());
    Grid& g = grids[static_cast<std::size_t>(f)];
    for (int i = 0; i < per_floor; ++i) {
      Rect block;
      if (!place_block(g, layouts[static_cast<std::size_t>(f)], rng, min_obj, max_obj, block)) continue;
      ObjectInstance obj;
      obj.category = cats[(offset + static_cast<std::size_t>(i)) % cats.size()];
      obj.floor = f;
      for (int r = block.r0; r <= block.r1; ++r)
        for (int c = block.c0; c <= block.c1; ++c) obj.cells.push_back({r, c});
      out.objects.push_back(std::move(obj));
    }
    const int clutter = p.clutter_per_room * p.rooms_per_floor;
    for (int i = 0; i < clutter; ++i) {
      Rect block;
      place_block(g, layouts[static_cast<std::size_t>(f)], rng, 2, 5, block);
    }
  }
  if (out.objects.empty()) return false;
  for (auto& g : grids) {
    if (!connected(g)) return false;
    out.floors.push_back(std::move(g.kind));
  }
  return true;
}

}  // namespace gen_detail

inline Scene generate_scene(const GenerationParams& params) {
  params.validate();
  Rng rng(params.rng_seed);
  for (int retry = 0; retry < params.max_retries; ++retry) {
    SceneData data;
    if (!gen_detail::attempt(params, rng, data)) continue;
    data.id = "gen-" + std::to_string(params.rng_seed) + "-" + std::to_string(params.floors) + "f";
    return Scene(std::move(data));
  }
  throw GenerationError("scene generation failed after " + std::to_string(params.max_retries) + " attempts (seed " +
                        std::to_string(params.rng_seed) + ")");
}

}  // namespace objnav::world
