#pragma once
// Collision predicates and steering for tree growth.

#include <algorithm>
#include <cmath>

#include "mgpf/gridmap.hpp"
#include "mgpf/types.hpp"

namespace mgpf {

struct Segment {
  State a;
  State b;
};

namespace detail {

// Slack that widens the traversal so a cell whose closed square touches the
// segment within floating-point noise is still visited.
inline constexpr double kTraversalSlack = 1e-9;

/// Visits every in-bounds cell whose closed square is within kTraversalSlack
/// of the closed segment [a, b]. Stops early when fn returns false.
template <typename Fn>
bool for_each_supercover_cell(const GridMap& map, State a, State b, Fn&& fn) {
  // Canonical endpoint order makes the traversal symmetric in (a, b).
  if (b.x < a.x || (b.x == a.x && b.y < a.y)) std::swap(a, b);
  const double eps = kTraversalSlack;
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;

  const int col_lo = std::max(0, static_cast<int>(std::floor(a.x - eps)));
  const int col_hi = std::min(map.width() - 1, static_cast<int>(std::floor(b.x + eps)));
  for (int col = col_lo; col <= col_hi; ++col) {
    double y0, y1;
    if (dx == 0.0) {
      y0 = a.y;
      y1 = b.y;
    } else {
      const double x0 = std::max(a.x, static_cast<double>(col));
      const double x1 = std::min(b.x, static_cast<double>(col + 1));
      if (x0 > x1) {
        // Column only reached through the slack; use the nearest endpoint.
        const State& p = (col < a.x) ? a : b;
        y0 = y1 = p.y;
      } else {
        y0 = a.y + dy * ((x0 - a.x) / dx);
        y1 = a.y + dy * ((x1 - a.x) / dx);
      }
    }
    if (y0 > y1) std::swap(y0, y1);
    const int row_lo = std::max(0, static_cast<int>(std::floor(y0 - eps)));
    const int row_hi = std::min(map.height() - 1, static_cast<int>(std::floor(y1 + eps)));
    for (int row = row_lo; row <= row_hi; ++row) {
      if (!fn(row, col)) return false;
    }
  }
  return true;
}

}  // namespace detail

/// True iff both endpoints are in bounds and no obstacle cell's closed square
/// touches the segment. Grazing an obstacle boundary counts as a collision.
inline bool segment_collision_free(const GridMap& map, const State& a, const State& b) {
  if (!is_finite(a) || !is_finite(b) || !map.in_bounds(a) || !map.in_bounds(b)) return false;
  return detail::for_each_supercover_cell(map, a, b, [&](int row, int col) { return !map.occupied(row, col); });
}

inline bool segment_collision_free(const GridMap& map, const Segment& s) {
  return segment_collision_free(map, s.a, s.b);
}

/// Move from `from` toward `to` by at most `step`.
inline State steer(const State& from, const State& to, double step) {
  const double d = distance(from, to);
  if (d <= step) return to;
  const double t = step / d;
  return {from.x + (to.x - from.x) * t, from.y + (to.y - from.y) * t};
}

}  // namespace mgpf
