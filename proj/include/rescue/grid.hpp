#pragma once

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <compare>
#include <cstdlib>
#include <limits>
#include <string>

namespace rescue {

/// Row-major raster. Index as grid(row, col).
template <typename Scalar>
using Grid = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using GridD = Grid<double>;
using GridB = Grid<bool>;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();
inline constexpr double kSqrt2 = 1.4142135623730950488;

struct Cell {
  int row = 0;
  int col = 0;

  auto operator<=>(const Cell&) const = default;
};

// Fixed neighbor order; every deterministic tie-break in the project relies on it.
inline constexpr std::array<Cell, 8> kNeighbors8{{
    {-1, -1}, {-1, 0}, {-1, 1}, {0, -1}, {0, 1}, {1, -1}, {1, 0}, {1, 1}}};

inline bool in_bounds(Cell c, int side) {
  return c.row >= 0 && c.col >= 0 && c.row < side && c.col < side;
}

template <typename Derived>
bool in_bounds(Cell c, const Eigen::ArrayBase<Derived>& grid) {
  return c.row >= 0 && c.col >= 0 && c.row < grid.rows() && c.col < grid.cols();
}

inline Cell offset(Cell c, Cell d) { return {c.row + d.row, c.col + d.col}; }

inline bool is_diagonal(Cell d) { return d.row != 0 && d.col != 0; }

inline int chebyshev(Cell a, Cell b) {
  return std::max(std::abs(a.row - b.row), std::abs(a.col - b.col));
}

/// Length of the shortest 8-connected path on a unit-cost grid.
inline double octile(Cell a, Cell b) {
  const int dr = std::abs(a.row - b.row);
  const int dc = std::abs(a.col - b.col);
  const int lo = std::min(dr, dc);
  const int hi = std::max(dr, dc);
  return (hi - lo) + kSqrt2 * lo;
}

inline Eigen::Index linear_index(Cell c, Eigen::Index cols) {
  return static_cast<Eigen::Index>(c.row) * cols + c.col;
}

inline Cell cell_at(Eigen::Index index, Eigen::Index cols) {
  return {static_cast<int>(index / cols), static_cast<int>(index % cols)};
}

inline std::string to_string(Cell c) {
  return "(" + std::to_string(c.row) + ", " + std::to_string(c.col) + ")";
}

}  // namespace rescue
