#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace mgpf {

/// Library error. Messages start with a stable short tag ("infeasible vertex",
/// "unreachable", "empty mask", ...) that callers and tests may match on.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Continuous position in map units; x grows right, y grows down.
struct State {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const State&, const State&) = default;
};

inline double distance(const State& a, const State& b) { return std::hypot(b.x - a.x, b.y - a.y); }

inline double squared_distance(const State& a, const State& b) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  return dx * dx + dy * dy;
}

inline bool is_finite(const State& s) { return std::isfinite(s.x) && std::isfinite(s.y); }

/// Grid cell index, row-major.
struct Cell {
  int row = 0;
  int col = 0;

  friend bool operator==(const Cell&, const Cell&) = default;
};

inline State cell_center(const Cell& c) { return {c.col + 0.5, c.row + 0.5}; }

}  // namespace mgpf
