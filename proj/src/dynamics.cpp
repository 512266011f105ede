#include "rescue/dynamics.hpp"

#include "rescue/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace rescue {

WorldState initial_world(std::shared_ptr<const ScenarioSpec> scenario) {
  WorldState w;
  const int n = scenario->grid.side_cells;
  w.scenario = std::move(scenario);
  w.water_depth = GridD::Zero(n, n);
  w.fire = Grid<FireState>::Constant(n, n, FireState::unburned);
  w.burn_age = Grid<int>::Zero(n, n);
  w.hazard_blocked = GridB::Constant(n, n, false);
  w.perturbation_blocked = GridB::Constant(n, n, false);
  if (w.kind() == HazardKind::wildfire) {
    for (const Cell c : w.scenario->hazard.ignitions) {
      w.fire(c.row, c.col) = FireState::burning;
      w.hazard_blocked(c.row, c.col) = true;
    }
  }
  return w;
}

namespace {

void redraw_perturbations(WorldState& w, double probability, Rng& rng) {
  if (probability <= 0.0) {
    w.perturbation_blocked.setConstant(false);
    return;
  }
  for (Eigen::Index i = 0; i < w.perturbation_blocked.size(); ++i) {
    w.perturbation_blocked.data()[i] = uniform01(rng) < probability;
  }
}

// One explicit relaxation pass: each wet cell sheds up to half its largest head
// difference, split among lower neighbors in proportion to head difference.
void relax_water(GridD& depth, const GridD& elevation) {
  const int n = static_cast<int>(depth.rows());
  const GridD surface = elevation + depth;
  GridD next = depth;
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const double d = depth(r, c);
      if (d <= 0.0) continue;
      const double h = surface(r, c);
      double total = 0.0;
      double largest = 0.0;
      for (const Cell o : kNeighbors8) {
        const Cell nb = offset({r, c}, o);
        if (!in_bounds(nb, n)) continue;
        const double diff = h - surface(nb.row, nb.col);
        if (diff > 0.0) {
          total += diff;
          largest = std::max(largest, diff);
        }
      }
      if (total <= 0.0) continue;
      const double moved = std::min(d, 0.5 * largest);
      for (const Cell o : kNeighbors8) {
        const Cell nb = offset({r, c}, o);
        if (!in_bounds(nb, n)) continue;
        const double diff = h - surface(nb.row, nb.col);
        if (diff > 0.0) next(nb.row, nb.col) += moved * diff / total;
      }
      next(r, c) -= moved;
    }
  }
  depth = next.max(0.0);
}

}  // namespace

WorldState step_flood(const WorldState& world, const HazardParams& params, Rng& rng) {
  if (world.kind() != HazardKind::flood) throw ContractError("step_flood: world is not a flood scenario");
  WorldState w = world;
  ++w.tick;
  const double rain_m = params.rainfall_mm_per_tick / 1000.0;
  if (rain_m > 0.0) {
    for (const Cell c : params.sources) w.water_depth(c.row, c.col) += rain_m;
  }
  for (int pass = 0; pass < params.relaxation_passes; ++pass) {
    relax_water(w.water_depth, w.scenario->terrain.elevation);
  }
  w.hazard_blocked = w.water_depth > params.blockage_depth_m;
  redraw_perturbations(w, params.perturbation_probability, rng);
  return w;
}

double wind_alignment(const HazardParams& params, int d_row, int d_col) {
  const double theta = params.wind_direction_deg * std::numbers::pi / 180.0;
  const double norm = std::hypot(d_row, d_col);
  const double cosine = (std::cos(theta) * d_col + std::sin(theta) * d_row) / norm;
  return std::clamp(1.0 + params.wind_speed * cosine, 0.0, 2.0);
}

WorldState step_fire(const WorldState& world, const HazardParams& params, Rng& rng) {
  if (world.kind() != HazardKind::wildfire) throw ContractError("step_fire: world is not a wildfire scenario");
  WorldState w = world;
  ++w.tick;
  const int n = world.side();
  const auto& fuel = world.scenario->terrain.fuel;

  std::array<double, 8> factor{};
  for (std::size_t k = 0; k < kNeighbors8.size(); ++k) {
    factor[k] = wind_alignment(params, kNeighbors8[k].row, kNeighbors8[k].col);
  }

  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      if (world.fire(r, c) != FireState::burning) continue;
      for (std::size_t k = 0; k < kNeighbors8.size(); ++k) {
        const Cell nb = offset({r, c}, kNeighbors8[k]);
        if (!in_bounds(nb, n) || world.fire(nb.row, nb.col) != FireState::unburned) continue;
        const double p = std::min(1.0, params.base_spread_probability * fuel(nb.row, nb.col) * factor[k]);
        if (p <= 0.0) continue;
        if (uniform01(rng) < p && w.fire(nb.row, nb.col) == FireState::unburned) {
          w.fire(nb.row, nb.col) = FireState::burning;
          w.burn_age(nb.row, nb.col) = 0;
        }
      }
      // age the cells that were already burning before this tick
      if (++w.burn_age(r, c) >= params.burn_duration_ticks) w.fire(r, c) = FireState::burned;
    }
  }
  w.hazard_blocked = w.fire != FireState::unburned;
  redraw_perturbations(w, params.perturbation_probability, rng);
  return w;
}

WorldState step_world(const WorldState& world, Rng& rng) {
  const auto& params = world.scenario->hazard;
  return world.kind() == HazardKind::flood ? step_flood(world, params, rng) : step_fire(world, params, rng);
}

bool passable(const WorldState& world, Cell cell, VehicleClass cls) {
  if (!in_bounds(cell, world.side())) throw BoundsError("passable: cell " + to_string(cell) + " out of bounds");
  if (cls == VehicleClass::drone) return true;
  return !world.hazard_blocked(cell.row, cell.col) && !world.perturbation_blocked(cell.row, cell.col);
}

GridD hazard_intensity(const WorldState& world) {
  if (world.kind() == HazardKind::flood) {
    const double threshold = world.scenario->hazard.blockage_depth_m;
    if (threshold <= 0.0) return (world.water_depth > 0.0).cast<double>();
    return (world.water_depth / threshold).min(1.0);
  }
  return world.fire.unaryExpr([](FireState s) {
    return s == FireState::burning ? 1.0 : s == FireState::burned ? 0.5 : 0.0;
  });
}

}  // namespace rescue
