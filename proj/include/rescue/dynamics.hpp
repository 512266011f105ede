#pragma once

#include "rescue/grid.hpp"
#include "rescue/rng.hpp"
#include "rescue/scenario.hpp"

#include <cstdint>
#include <memory>
#include <vector>

namespace rescue {

inline constexpr double kTickSeconds = 45.0;

enum class FireState : std::uint8_t { unburned, burning, burned };

/// Evolving hazard and passability state. Entities that move (vehicles, stocks,
/// survivor status) live in the engine; this is the environment alone.
struct WorldState {
  std::shared_ptr<const ScenarioSpec> scenario;
  int tick = 0;
  GridD water_depth;
  Grid<FireState> fire;
  Grid<int> burn_age;
  GridB hazard_blocked;        // water above threshold, or burning/burned
  GridB perturbation_blocked;  // transient random obstacles

  HazardKind kind() const { return scenario->hazard_kind; }
  int side() const { return scenario->grid.side_cells; }

  /// Cells a ground vehicle cannot enter this tick.
  GridB ground_blocked() const { return hazard_blocked || perturbation_blocked; }

  double total_water() const { return water_depth.sum(); }
};

/// Tick-0 state: dry, ignition cells burning, nothing blocked.
WorldState initial_world(std::shared_ptr<const ScenarioSpec> scenario);

WorldState step_flood(const WorldState& world, const HazardParams& params, Rng& rng);
WorldState step_fire(const WorldState& world, const HazardParams& params, Rng& rng);

/// Dispatches on the scenario's hazard kind.
WorldState step_world(const WorldState& world, Rng& rng);

/// Throws BoundsError for cells outside the grid.
bool passable(const WorldState& world, Cell cell, VehicleClass cls);

/// Multiplier on ignition probability for spread in direction (d_row, d_col).
double wind_alignment(const HazardParams& params, int d_row, int d_col);

/// Hazard intensity in [0, 1] as seen by sensors: flood depth relative to the
/// blockage threshold, or 1 for burning and 0.5 for burned cells.
GridD hazard_intensity(const WorldState& world);

}  // namespace rescue
