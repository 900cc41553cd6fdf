#pragma once

#include <cmath>

#include "objnav/core.hpp"

namespace objnav {

inline Cell cell_of(double x, double y, double cell_size) {
  return Cell{static_cast<int>(std::floor(y / cell_size)), static_cast<int>(std::floor(x / cell_size))};
}

inline double cell_center_x(Cell c, double cell_size) { return (c.col + 0.5) * cell_size; }
inline double cell_center_y(Cell c, double cell_size) { return (c.row + 0.5) * cell_size; }

// Walks the cells pierced by a ray from (x, y) (meters, x along columns, y
// along rows) at angle_deg. For every cell boundary crossed at distance
// t <= max_t, calls visit(from, to, t); a false return stops the walk.
// When the ray passes exactly through a corner both side cells are visited
// (column step first), so the walk is 4-connected.
template <typename Visit>
void traverse_grid(double x, double y, double angle_deg, double cell_size, double max_t, Visit&& visit) {
  const double a = deg_to_rad(angle_deg);
  const double dx = std::cos(a);
  const double dy = std::sin(a);
  Cell cur = cell_of(x, y, cell_size);

  const int step_c = dx > 0 ? 1 : (dx < 0 ? -1 : 0);
  const int step_r = dy > 0 ? 1 : (dy < 0 ? -1 : 0);
  const double delta_x = step_c != 0 ? cell_size / std::abs(dx) : kInf;
  const double delta_y = step_r != 0 ? cell_size / std::abs(dy) : kInf;
  double next_x = kInf;
  double next_y = kInf;
  if (step_c > 0) next_x = ((cur.col + 1) * cell_size - x) / dx;
  if (step_c < 0) next_x = (cur.col * cell_size - x) / dx;
  if (step_r > 0) next_y = ((cur.row + 1) * cell_size - y) / dy;
  if (step_r < 0) next_y = (cur.row * cell_size - y) / dy;

  while (true) {
    Cell nxt = cur;
    double t;
    if (next_x <= next_y) {
      t = next_x;
      nxt.col += step_c;
      next_x += delta_x;
    } else {
      t = next_y;
      nxt.row += step_r;
      next_y += delta_y;
    }
    if (!(t <= max_t)) return;
    if (!visit(cur, nxt, t)) return;
    cur = nxt;
  }
}

}  // namespace objnav
