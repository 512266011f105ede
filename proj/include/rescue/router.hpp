#pragma once

#include "rescue/dynamics.hpp"
#include "rescue/grid.hpp"

#include <map>
#include <optional>
#include <span>
#include <vector>

namespace rescue {

/// Seconds to traverse each cell for one vehicle class at one instant; infinite where impassable.
struct CostMap {
  GridD seconds;

  int side() const { return static_cast<int>(seconds.rows()); }
  double at(Cell c) const { return seconds(c.row, c.col); }
  bool passable(Cell c) const { return std::isfinite(seconds(c.row, c.col)); }
};

CostMap make_cost_map(const WorldState& world, VehicleClass cls, double speed_kmh);

/// Uniform map, e.g. for drones or tests.
CostMap uniform_cost_map(int side, double seconds_per_cell);

/// Cost of moving between two 8-adjacent cells: mean of the two cell costs,
/// times sqrt(2) on diagonals. Symmetric by construction.
inline double step_cost(const CostMap& costs, Cell from, Cell to) {
  const double base = 0.5 * (costs.at(from) + costs.at(to));
  return is_diagonal({to.row - from.row, to.col - from.col}) ? base * kSqrt2 : base;
}

struct Path {
  std::vector<Cell> cells;  // src .. dst; empty when src == dst
  double cost = 0.0;
};

/// Dijkstra over 8-neighbors. std::nullopt when dst is unreachable.
std::optional<Path> shortest_path(const CostMap& costs, Cell src, Cell dst);

/// Cost from every cell to `target` (infinite where unreachable).
GridD distance_field(const CostMap& costs, Cell target);

/// Next cell on a cheapest route toward the field's target, or nullopt if stuck or already there.
std::optional<Cell> descend(const CostMap& costs, const GridD& field, Cell from);

/// Per-instant memo of distance fields keyed by target cell.
class FieldCache {
 public:
  explicit FieldCache(const CostMap& costs) : costs_(&costs) {}

  const GridD& to(Cell target);
  const CostMap& costs() const { return *costs_; }

 private:
  const CostMap* costs_;
  std::map<Eigen::Index, GridD> fields_;
};

struct TourStop {
  int target = 0;  // index into the targets argument
  Cell cell;
  double arrival_s = 0.0;
};

struct Tour {
  std::vector<TourStop> stops;
  std::vector<int> skipped;  // unreachable target indices
};

/// Nearest-neighbor visiting order with cumulative shortest-path arrival times.
Tour route_tour(const CostMap& costs, Cell start, std::span<const Cell> targets);

}  // namespace rescue
