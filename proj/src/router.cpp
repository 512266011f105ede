#include "rescue/router.hpp"

#include "rescue/errors.hpp"

#include <algorithm>
#include <queue>
#include <tuple>

namespace rescue {

CostMap make_cost_map(const WorldState& world, VehicleClass cls, double speed_kmh) {
  const auto& scenario = *world.scenario;
  const int n = scenario.grid.side_cells;
  const double metres_per_second = speed_kmh / 3.6;
  const double base = scenario.grid.cell_size_m / metres_per_second;
  if (cls == VehicleClass::drone) return uniform_cost_map(n, base);

  CostMap costs;
  costs.seconds = scenario.terrain.road.select(GridD::Constant(n, n, base), GridD::Constant(n, n, base / kOffRoadFactor));
  costs.seconds = world.ground_blocked().select(GridD::Constant(n, n, kInfinity), costs.seconds);
  return costs;
}

CostMap uniform_cost_map(int side, double seconds_per_cell) {
  return {GridD::Constant(side, side, seconds_per_cell)};
}

namespace {

// (cost, insertion sequence, linear index): ties pop in insertion order.
using QueueEntry = std::tuple<double, std::uint64_t, Eigen::Index>;
using MinQueue = std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<>>;

void dijkstra(const CostMap& costs, Cell source, std::vector<double>& dist, std::vector<Eigen::Index>* parent,
              std::optional<Eigen::Index> stop_at) {
  const int n = costs.side();
  dist.assign(static_cast<std::size_t>(n) * n, kInfinity);
  if (parent) parent->assign(dist.size(), -1);
  if (!costs.passable(source)) return;

  std::vector<char> done(dist.size(), 0);
  MinQueue queue;
  std::uint64_t sequence = 0;
  const Eigen::Index s = linear_index(source, n);
  dist[s] = 0.0;
  queue.emplace(0.0, sequence++, s);
  while (!queue.empty()) {
    const auto [d, seq, u] = queue.top();
    queue.pop();
    if (done[u]) continue;
    done[u] = 1;
    if (stop_at && u == *stop_at) return;
    const Cell cu = cell_at(u, n);
    for (const Cell o : kNeighbors8) {
      const Cell cv = offset(cu, o);
      if (!in_bounds(cv, n) || !costs.passable(cv)) continue;
      const Eigen::Index v = linear_index(cv, n);
      if (done[v]) continue;
      const double nd = d + step_cost(costs, cu, cv);
      if (nd < dist[v]) {
        dist[v] = nd;
        if (parent) (*parent)[v] = u;
        queue.emplace(nd, sequence++, v);
      }
    }
  }
}

}  // namespace

std::optional<Path> shortest_path(const CostMap& costs, Cell src, Cell dst) {
  const int n = costs.side();
  if (!in_bounds(src, n) || !in_bounds(dst, n)) {
    throw BoundsError("shortest_path: endpoint out of bounds");
  }
  if (src == dst) return Path{};
  std::vector<double> dist;
  std::vector<Eigen::Index> parent;
  const Eigen::Index target = linear_index(dst, n);
  dijkstra(costs, src, dist, &parent, target);
  if (!std::isfinite(dist[target])) return std::nullopt;

  Path path;
  path.cost = dist[target];
  for (Eigen::Index at = target; at != -1; at = parent[at]) path.cells.push_back(cell_at(at, n));
  std::reverse(path.cells.begin(), path.cells.end());
  return path;
}

GridD distance_field(const CostMap& costs, Cell target) {
  const int n = costs.side();
  if (!in_bounds(target, n)) throw BoundsError("distance_field: target out of bounds");
  std::vector<double> dist;
  dijkstra(costs, target, dist, nullptr, std::nullopt);
  return Eigen::Map<const GridD>(dist.data(), n, n);
}

std::optional<Cell> descend(const CostMap& costs, const GridD& field, Cell from) {
  const int n = costs.side();
  if (field(from.row, from.col) == 0.0) return std::nullopt;
  std::optional<Cell> best;
  double best_cost = kInfinity;
  for (const Cell o : kNeighbors8) {
    const Cell to = offset(from, o);
    if (!in_bounds(to, n) || !costs.passable(to)) continue;
    const double remaining = field(to.row, to.col);
    if (!std::isfinite(remaining)) continue;
    const double total = step_cost(costs, from, to) + remaining;
    if (total < best_cost) {
      best_cost = total;
      best = to;
    }
  }
  return best;
}

const GridD& FieldCache::to(Cell target) {
  const Eigen::Index key = linear_index(target, costs_->side());
  auto it = fields_.find(key);
  if (it == fields_.end()) it = fields_.emplace(key, distance_field(*costs_, target)).first;
  return it->second;
}

Tour route_tour(const CostMap& costs, Cell start, std::span<const Cell> targets) {
  const int n = costs.side();
  if (!in_bounds(start, n)) throw BoundsError("route_tour: start out of bounds");
  Tour tour;
  FieldCache fields(costs);
  std::vector<char> open(targets.size(), 0);
  for (std::size_t t = 0; t < targets.size(); ++t) {
    if (!in_bounds(targets[t], n)) throw BoundsError("route_tour: target out of bounds");
    if (std::isfinite(fields.to(targets[t])(start.row, start.col))) {
      open[t] = 1;
    } else {
      tour.skipped.push_back(static_cast<int>(t));
    }
  }

  Cell at = start;
  double clock = 0.0;
  for (;;) {
    int next = -1;
    double best = kInfinity;
    for (std::size_t t = 0; t < targets.size(); ++t) {
      if (!open[t]) continue;
      const double d = fields.to(targets[t])(at.row, at.col);
      if (d < best) {
        best = d;
        next = static_cast<int>(t);
      }
    }
    if (next < 0) break;
    open[next] = 0;
    clock += best;
    at = targets[next];
    tour.stops.push_back({next, at, clock});
  }
  return tour;
}

}  // namespace rescue
