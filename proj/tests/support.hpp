#pragma once

// Shared fixtures and brute-force oracles for the unit and acceptance tests.

#include "rescue/optimizer.hpp"
#include "rescue/router.hpp"
#include "rescue/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace testing {

using namespace rescue;

/// Square scenario with flat terrain, full fuel and no entities.
inline ScenarioSpec flat_spec(int side, HazardKind kind) {
  ScenarioSpec s;
  s.grid.side_cells = side;
  s.hazard_kind = kind;
  s.terrain.elevation = GridD::Zero(side, side);
  s.terrain.fuel = GridD::Ones(side, side);
  s.terrain.road = GridB::Constant(side, side, false);
  s.hazard.perturbation_probability = 0.0;
  s.hazard.base_spread_probability = kind == HazardKind::wildfire ? 1.0 : 0.0;
  return s;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("rescue_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Exhaustive search over simple 8-connected paths, costs summed from the source.
inline double brute_force_cost(const CostMap& costs, Cell src, Cell dst) {
  const int n = costs.side();
  if (src == dst) return 0.0;
  if (!costs.passable(src) || !costs.passable(dst)) return kInfinity;
  std::vector<char> used(static_cast<std::size_t>(n) * n, 0);
  double best = kInfinity;
  std::function<void(Cell, double)> walk = [&](Cell at, double cost) {
    if (at == dst) {
      best = std::min(best, cost);
      return;
    }
    for (int dr = -1; dr <= 1; ++dr) {
      for (int dc = -1; dc <= 1; ++dc) {
        if (dr == 0 && dc == 0) continue;
        const Cell next{at.row + dr, at.col + dc};
        if (next.row < 0 || next.col < 0 || next.row >= n || next.col >= n) continue;
        if (!costs.passable(next) || used[next.row * n + next.col]) continue;
        double step = 0.5 * (costs.at(at) + costs.at(next));
        if (dr != 0 && dc != 0) step *= std::sqrt(2.0);
        used[next.row * n + next.col] = 1;
        walk(next, cost + step);
        used[next.row * n + next.col] = 0;
      }
    }
  };
  used[src.row * n + src.col] = 1;
  walk(src, 0.0);
  return best;
}

/// Random grid of side 1..4 with obstacles; cell costs either uniform or random.
inline CostMap random_small_map(std::mt19937_64& rng, bool random_costs) {
  std::uniform_int_distribution<int> side(1, 4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int n = side(rng);
  const double wall_rate = 0.35 * u(rng);
  CostMap costs{GridD(n, n)};
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      costs.seconds(r, c) = u(rng) < wall_rate ? kInfinity : random_costs ? 1.0 + 9.0 * u(rng) : 9.0;
    }
  }
  return costs;
}

/// Two vehicles (ground, drone) and three zones on a 12x12 grid with scattered walls.
inline DecisionProblem toy_problem(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  const int n = 12;

  DecisionProblem p;
  p.ground_costs = uniform_cost_map(n, 9.0);
  for (int i = 0; i < 14; ++i) p.ground_costs.seconds(pick(0, n - 1), pick(0, n - 1)) = kInfinity;
  p.drone_costs = uniform_cost_map(n, 4.5);

  auto free_cell = [&] {
    for (;;) {
      const Cell c{pick(0, n - 1), pick(0, n - 1)};
      if (p.ground_costs.passable(c)) return c;
    }
  };

  p.vehicles.push_back({VehicleClass::ground, free_cell(), kGroundRoadSpeedKmh, kGroundCapacity});
  p.vehicles.push_back({VehicleClass::drone, free_cell(), kDroneSpeedKmh, kDroneCapacity});
  for (int z = 0; z < 3; ++z) {
    PlanZone zone;
    zone.severity = 1.0 + 9.0 * u(rng);
    const Cell centre = free_cell();
    zone.anchor = centre;
    const int count = pick(1, 3);
    for (int k = 0; k < count; ++k) {
      Cell c{std::clamp(centre.row + pick(-2, 2), 0, n - 1), std::clamp(centre.col + pick(-2, 2), 0, n - 1)};
      if (!p.ground_costs.passable(c)) c = centre;
      zone.targets.push_back(static_cast<int>(p.targets.size()));
      p.targets.push_back({c, pick(1, 6)});
    }
    p.zones.push_back(zone);
  }
  p.horizon_ticks = pick(1, 4);
  p.available_supply = pick(1, 6);
  p.prepare();
  return p;
}

struct Exhaustive {
  double best = kInfinity;
  std::vector<int> assignment;
  Eigen::VectorXd shares;
};

/// Every idle/zone choice per vehicle crossed with supply shares on a simplex grid of step 1/steps.
inline Exhaustive exhaustive_optimum(const DecisionProblem& p, const ObjectiveWeights& w, int steps = 20) {
  const int v_count = p.vehicle_count();
  const int k_count = p.zone_count();
  Exhaustive out;
  long combos = 1;
  for (int v = 0; v < v_count; ++v) combos *= k_count + 1;

  std::vector<Eigen::VectorXd> share_grid;
  std::function<void(int, int, Eigen::VectorXd&)> fill = [&](int z, int left, Eigen::VectorXd& s) {
    if (z == k_count) {
      share_grid.push_back(s);
      return;
    }
    for (int i = 0; i <= left; ++i) {
      s(z) = static_cast<double>(i) / steps;
      fill(z + 1, left - i, s);
    }
  };
  Eigen::VectorXd s(k_count);
  fill(0, steps, s);

  for (long code = 0; code < combos; ++code) {
    long rest = code;
    std::vector<int> assignment(v_count);
    bool feasible = true;
    for (int v = 0; v < v_count; ++v) {
      const int c = static_cast<int>(rest % (k_count + 1));
      rest /= k_count + 1;
      assignment[v] = c == 0 ? kIdle : c - 1;
      if (c != 0 && !p.travel.zone_reachable(v, c - 1)) feasible = false;
    }
    if (!feasible) continue;
    for (const auto& shares : share_grid) {
      const double f = fitness(build_plan(assignment, shares, p), p, w);
      if (f < out.best) {
        out.best = f;
        out.assignment = assignment;
        out.shares = shares;
      }
    }
  }
  return out;
}

}  // namespace testing
