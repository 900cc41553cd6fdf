#pragma once

#include <vector>

#include "objnav/perception/semantic_map.hpp"

namespace objnav::perception {

struct FrontierCluster {
  std::vector<Cell> cells;
  double centroid_row = 0.0;
  double centroid_col = 0.0;
  int size() const { return static_cast<int>(cells.size()); }
};

struct FrontierSet {
  std::vector<FrontierCluster> clusters;
  bool empty() const { return clusters.empty(); }
};

inline bool is_frontier(const SemanticMap& map, int r, int c) {
  if (!map.get(kExplored, r, c) || map.get(kObstacle, r, c)) return false;
  const int nr[4] = {r - 1, r + 1, r, r};
  const int nc[4] = {c, c, c - 1, c + 1};
  for (int k = 0; k < 4; ++k)
    if (map.in_bounds(nr[k], nc[k]) && !map.get(kExplored, nr[k], nc[k])) return true;
  return false;
}

// Frontier cells grouped into 8-connected clusters, in row-major order of
// each cluster's first cell. Clusters smaller than min_cluster_size are dropped.
inline FrontierSet extract_frontiers(const SemanticMap& map, int min_cluster_size = 1) {
  const int m = map.size();
  std::vector<std::uint8_t> mark(map.plane(), 0);
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < m; ++c)
      if (is_frontier(map, r, c)) mark[static_cast<std::size_t>(r * m + c)] = 1;

  FrontierSet out;
  std::vector<Cell> stack;
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < m; ++c) {
      if (mark[static_cast<std::size_t>(r * m + c)] != 1) continue;
      FrontierCluster cl;
      mark[static_cast<std::size_t>(r * m + c)] = 2;
      stack.push_back({r, c});
      while (!stack.empty()) {
        const Cell p = stack.back();
        stack.pop_back();
        cl.cells.push_back(p);
        for (int dr = -1; dr <= 1; ++dr)
          for (int dc = -1; dc <= 1; ++dc) {
            const int nr = p.row + dr, nc = p.col + dc;
            if (!map.in_bounds(nr, nc) || mark[static_cast<std::size_t>(nr * m + nc)] != 1) continue;
            mark[static_cast<std::size_t>(nr * m + nc)] = 2;
            stack.push_back({nr, nc});
          }
      }
      if (cl.size() < min_cluster_size) continue;
      double sr = 0.0, sc = 0.0;
      for (const Cell& q : cl.cells) {
        sr += q.row;
        sc += q.col;
      }
      cl.centroid_row = sr / cl.size();
      cl.centroid_col = sc / cl.size();
      out.clusters.push_back(std::move(cl));
    }
  return out;
}

}  // namespace objnav::perception
