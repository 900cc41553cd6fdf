#pragma once

#include <algorithm>
#include <vector>

#include "objnav/perception/semantic_map.hpp"

namespace objnav::perception {

struct AugmentConfig {
  int denoise_min_blob = 2;         // 8-connected obstacle blobs smaller than this are removed
  int obstacle_dilation_cells = 1;  // square (Chebyshev) dilation radius
  int hole_fill_max = 40;           // enclosed unexplored holes smaller than this become explored

  void validate() const {
    if (denoise_min_blob < 0 || obstacle_dilation_cells < 0 || hole_fill_max < 0)
      throw ConfigError("augment: parameters must be >= 0");
  }
};

namespace detail {

struct Box {
  int r0, c0, r1, c1;  // inclusive; empty when r1 < r0
};

inline Box explored_box(const SemanticMap& map) {
  Box b{map.size(), map.size(), -1, -1};
  const std::uint8_t* ex = map.channel(kExplored);
  const int m = map.size();
  for (int r = 0; r < m; ++r) {
    const std::uint8_t* row = ex + static_cast<std::size_t>(r) * static_cast<std::size_t>(m);
    const auto* first = std::find(row, row + m, std::uint8_t{1});
    if (first == row + m) continue;
    const auto last = m - 1 - static_cast<int>(std::find(std::make_reverse_iterator(row + m),
                                                           std::make_reverse_iterator(row), std::uint8_t{1}) -
                                                 std::make_reverse_iterator(row + m));
    b.r0 = std::min(b.r0, r);
    b.r1 = std::max(b.r1, r);
    b.c0 = std::min(b.c0, static_cast<int>(first - row));
    b.c1 = std::max(b.c1, last);
  }
  return b;
}

// Labels connected components of cells satisfying `member` inside the box;
// calls on_component(cells, touches_box_edge) for each.
template <typename Member, typename OnComponent>
void components(const Box& b, bool eight, Member&& member, OnComponent&& on_component) {
  const int h = b.r1 - b.r0 + 1, w = b.c1 - b.c0 + 1;
  std::vector<std::uint8_t> seen(static_cast<std::size_t>(h) * static_cast<std::size_t>(w), 0);
  std::vector<Cell> stack, comp;
  auto idx = [&](int r, int c) { return static_cast<std::size_t>(r - b.r0) * static_cast<std::size_t>(w) + static_cast<std::size_t>(c - b.c0); };
  for (int r = b.r0; r <= b.r1; ++r)
    for (int c = b.c0; c <= b.c1; ++c) {
      if (seen[idx(r, c)] || !member(r, c)) continue;
      comp.clear();
      bool edge = false;
      seen[idx(r, c)] = 1;
      stack.push_back({r, c});
      while (!stack.empty()) {
        const Cell p = stack.back();
        stack.pop_back();
        comp.push_back(p);
        if (p.row == b.r0 || p.row == b.r1 || p.col == b.c0 || p.col == b.c1) edge = true;
        for (int dr = -1; dr <= 1; ++dr)
          for (int dc = -1; dc <= 1; ++dc) {
            if ((dr == 0 && dc == 0) || (!eight && dr != 0 && dc != 0)) continue;
            const int nr = p.row + dr, nc = p.col + dc;
            if (nr < b.r0 || nr > b.r1 || nc < b.c0 || nc > b.c1) continue;
            if (seen[idx(nr, nc)] || !member(nr, nc)) continue;
            seen[idx(nr, nc)] = 1;
            stack.push_back({nr, nc});
          }
      }
      on_component(comp, edge);
    }
}

}  // namespace detail

// Denoise, dilate, then fill enclosed holes. Category channels are left
// untouched. Work is confined to the bounding box of explored cells, outside
// of which the map is entirely unknown.
inline void augment_in_place(SemanticMap& map, const AugmentConfig& cfg) {
  detail::Box b = detail::explored_box(map);
  if (b.r1 < b.r0) return;
  const int m = map.size();

  if (cfg.denoise_min_blob > 1) {
    std::vector<Cell> removed;
    detail::components(b, true, [&](int r, int c) { return map.get(kObstacle, r, c) != 0; },
                       [&](const std::vector<Cell>& comp, bool) {
                         if (static_cast<int>(comp.size()) < cfg.denoise_min_blob)
                           removed.insert(removed.end(), comp.begin(), comp.end());
                       });
    for (const Cell& c : removed) map.put(kObstacle, c.row, c.col, 0);
  }

  if (const int n = cfg.obstacle_dilation_cells; n > 0) {
    const detail::Box grown{std::max(0, b.r0 - n), std::max(0, b.c0 - n), std::min(m - 1, b.r1 + n),
                            std::min(m - 1, b.c1 + n)};
    const int h = grown.r1 - grown.r0 + 1, w = grown.c1 - grown.c0 + 1;
    // Separable square dilation: rows, then columns.
    std::vector<std::uint8_t> src(static_cast<std::size_t>(h) * static_cast<std::size_t>(w)), tmp(src.size(), 0);
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c)
        src[static_cast<std::size_t>(r * w + c)] = map.get(kObstacle, grown.r0 + r, grown.c0 + c);
    for (int r = 0; r < h; ++r) {
      int last = -1000000;
      for (int c = 0; c < w; ++c) {
        if (src[static_cast<std::size_t>(r * w + c)]) last = c;
        if (c - last <= n) tmp[static_cast<std::size_t>(r * w + c)] = 1;
      }
      last = 1000000;
      for (int c = w - 1; c >= 0; --c) {
        if (src[static_cast<std::size_t>(r * w + c)]) last = c;
        if (last - c <= n) tmp[static_cast<std::size_t>(r * w + c)] = 1;
      }
    }
    for (int c = 0; c < w; ++c) {
      int last = -1000000;
      for (int r = 0; r < h; ++r) {
        if (tmp[static_cast<std::size_t>(r * w + c)]) last = r;
        if (r - last <= n) src[static_cast<std::size_t>(r * w + c)] = 1;
      }
      last = 1000000;
      for (int r = h - 1; r >= 0; --r) {
        if (tmp[static_cast<std::size_t>(r * w + c)]) last = r;
        if (last - r <= n) src[static_cast<std::size_t>(r * w + c)] = 1;
      }
    }
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c)
        if (src[static_cast<std::size_t>(r * w + c)]) map.mark_obstacle({grown.r0 + r, grown.c0 + c});
    b = grown;
  }

  if (cfg.hole_fill_max > 0) {
    std::vector<Cell> filled;
    detail::components(b, false, [&](int r, int c) { return map.get(kExplored, r, c) == 0; },
                       [&](const std::vector<Cell>& comp, bool touches_edge) {
                         if (!touches_edge && static_cast<int>(comp.size()) < cfg.hole_fill_max)
                           filled.insert(filled.end(), comp.begin(), comp.end());
                       });
    for (const Cell& c : filled) map.mark_explored(c);
  }
}

inline SemanticMap augment_map(const SemanticMap& map, const AugmentConfig& cfg) {
  SemanticMap out = map;
  augment_in_place(out, cfg);
  return out;
}

}  // namespace objnav::perception
