#include "rescue/scenario.hpp"

#include "rescue/errors.hpp"
#include "rescue/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace rescue {

std::string_view to_string(HazardKind kind) {
  return kind == HazardKind::flood ? "flood" : "wildfire";
}

std::string_view to_string(VehicleClass cls) {
  return cls == VehicleClass::ground ? "ground" : "drone";
}

HazardKind parse_hazard_kind(std::string_view text) {
  if (text == "flood") return HazardKind::flood;
  if (text == "wildfire" || text == "fire") return HazardKind::wildfire;
  throw ConfigError("hazard: unknown kind '" + std::string(text) + "'");
}

VehicleClass parse_vehicle_class(std::string_view text) {
  if (text == "ground") return VehicleClass::ground;
  if (text == "drone") return VehicleClass::drone;
  throw ConfigError("vehicle class: unknown value '" + std::string(text) + "'");
}

std::string_view to_string(Preset preset) {
  switch (preset) {
    case Preset::benchmark: return "benchmark";
    case Preset::desk: return "desk";
    case Preset::custom: return "custom";
  }
  return "custom";
}

Preset parse_preset(std::string_view text) {
  if (text == "benchmark") return Preset::benchmark;
  if (text == "desk") return Preset::desk;
  if (text == "custom") return Preset::custom;
  throw ConfigError("preset: unknown value '" + std::string(text) + "'");
}

int side_cells_for_area(double area_km2, double cell_size_m) {
  if (!(area_km2 > 0.0) || !(cell_size_m > 0.0)) {
    throw ConfigError("area_km2: must be positive");
  }
  return static_cast<int>(std::lround(std::sqrt(area_km2) * 1000.0 / cell_size_m));
}

bool operator==(const TerrainField& a, const TerrainField& b) {
  auto same_shape = [](const auto& x, const auto& y) {
    return x.rows() == y.rows() && x.cols() == y.cols();
  };
  return same_shape(a.elevation, b.elevation) && same_shape(a.fuel, b.fuel) &&
         same_shape(a.road, b.road) && (a.elevation == b.elevation).all() &&
         (a.fuel == b.fuel).all() && (a.road == b.road).all();
}

bool operator==(const ScenarioSpec& a, const ScenarioSpec& b) {
  return a.grid == b.grid && a.terrain == b.terrain && a.hazard_kind == b.hazard_kind &&
         a.hazard == b.hazard && a.survivors == b.survivors && a.depots == b.depots &&
         a.vehicles == b.vehicles && a.supply_total == b.supply_total && a.seed == b.seed;
}

int ScenarioSpec::total_survivors() const {
  int total = 0;
  for (const auto& g : survivors) total += g.size;
  return total;
}

int ScenarioSpec::count_vehicles(VehicleClass cls) const {
  return static_cast<int>(std::count_if(vehicles.begin(), vehicles.end(),
                                        [cls](const VehicleSpec& v) { return v.cls == cls; }));
}

namespace {

[[noreturn]] void invalid(const std::string& field, const std::string& what) {
  throw ValidationError(field + ": " + what);
}

void check_cell(const std::string& field, Cell c, int side) {
  if (!in_bounds(c, side)) invalid(field, "cell " + to_string(c) + " out of bounds");
}

}  // namespace

void validate(const ScenarioSpec& spec) {
  const int n = spec.grid.side_cells;
  if (n < 4) invalid("grid.side_cells", "must be at least 4");
  if (!(spec.grid.cell_size_m > 0.0)) invalid("grid.cell_size_m", "must be positive");

  const auto& t = spec.terrain;
  if (t.elevation.rows() != n || t.elevation.cols() != n) invalid("terrain.elevation", "wrong size");
  if (t.fuel.rows() != n || t.fuel.cols() != n) invalid("terrain.fuel", "wrong size");
  if (t.road.rows() != n || t.road.cols() != n) invalid("terrain.road", "wrong size");
  if (!t.elevation.isFinite().all()) invalid("terrain.elevation", "non-finite value");
  if (!((t.fuel >= 0.0) && (t.fuel <= 1.0)).all()) invalid("terrain.fuel", "values must lie in [0, 1]");

  const auto& h = spec.hazard;
  if (!(h.rainfall_mm_per_tick >= 0.0)) invalid("hazard.rainfall_mm_per_tick", "must be non-negative");
  if (!(h.blockage_depth_m >= 0.0)) invalid("hazard.blockage_depth_m", "must be non-negative");
  if (h.relaxation_passes < 0) invalid("hazard.relaxation_passes", "must be non-negative");
  if (!(h.wind_speed >= 0.0 && h.wind_speed <= 1.0)) invalid("hazard.wind_speed", "must lie in [0, 1]");
  if (!(h.base_spread_probability >= 0.0 && h.base_spread_probability <= 1.0)) {
    invalid("hazard.base_spread_probability", "must lie in [0, 1]");
  }
  if (h.burn_duration_ticks < 1) invalid("hazard.burn_duration_ticks", "must be at least 1");
  if (!(h.perturbation_probability >= 0.0 && h.perturbation_probability <= 1.0)) {
    invalid("hazard.perturbation_probability", "must lie in [0, 1]");
  }
  for (const auto& c : h.sources) check_cell("hazard.sources", c, n);
  for (const auto& c : h.ignitions) check_cell("hazard.ignitions", c, n);

  for (const auto& g : spec.survivors) {
    check_cell("survivors", g.cell, n);
    if (g.size < 1) invalid("survivors", "group size must be at least 1");
  }
  long stock = 0;
  for (const auto& d : spec.depots) {
    check_cell("depots", d.cell, n);
    if (d.stock < 0) invalid("depots", "stock must be non-negative");
    stock += d.stock;
  }
  for (const auto& v : spec.vehicles) {
    check_cell("vehicles", v.start, n);
    if (v.capacity < 0) invalid("vehicles", "capacity must be non-negative");
    if (!(v.speed_kmh > 0.0)) invalid("vehicles", "speed_kmh must be positive");
  }
  if (spec.supply_total < 0) invalid("supply_total", "must be non-negative");
  if (stock != spec.supply_total) {
    invalid("supply_total", "depot stock sums to " + std::to_string(stock) + ", expected " +
                                std::to_string(spec.supply_total));
  }
}

void PresetParams::validate() const {
  auto require = [](bool ok, const char* field, const char* what) {
    if (!ok) throw ConfigError(std::string(field) + ": " + what);
  };
  require(side_cells >= 4, "side_cells", "must be at least 4");
  require(cell_size_m > 0.0, "cell_size_m", "must be positive");
  require(ground_vehicles >= 0, "ground_vehicles", "must be non-negative");
  require(drones >= 0, "drones", "must be non-negative");
  require(survivor_count >= 0, "survivor_count", "must be non-negative");
  require(mean_group_size >= 1, "mean_group_size", "must be at least 1");
  require(cluster_count >= 1, "cluster_count", "must be at least 1");
  require(cluster_spread_cells >= 0.0, "cluster_spread_cells", "must be non-negative");
  require(supply_total >= 0, "supply_total", "must be non-negative");
  require(depot_count >= 1, "depot_count", "must be at least 1");
  require(road_spacing_cells >= 1, "road_spacing_cells", "must be at least 1");
  require(road_gap_probability >= 0.0 && road_gap_probability <= 1.0, "road_gap_probability",
          "must lie in [0, 1]");
  require(rainfall_mm_per_tick >= 0.0, "rainfall_mm_per_tick", "must be non-negative");
  require(blockage_depth_m >= 0.0, "blockage_depth_m", "must be non-negative");
  require(storm_radius_fraction >= 0.0, "storm_radius_fraction", "must be non-negative");
  require(ignition_count >= 0, "ignition_count", "must be non-negative");
  require(base_spread_probability >= 0.0 && base_spread_probability <= 1.0,
          "base_spread_probability", "must lie in [0, 1]");
  require(max_wind_speed >= 0.0 && max_wind_speed <= 1.0, "max_wind_speed", "must lie in [0, 1]");
  require(burn_duration_ticks >= 1, "burn_duration_ticks", "must be at least 1");
  require(perturbation_probability >= 0.0 && perturbation_probability <= 1.0,
          "perturbation_probability", "must lie in [0, 1]");
}

PresetParams benchmark_preset() { return PresetParams{}; }

PresetParams desk_preset() {
  PresetParams p;
  p.side_cells = 50;
  p.ground_vehicles = 12;
  p.drones = 3;
  p.survivor_count = 600;
  p.cluster_count = 8;
  p.supply_total = 120;
  p.depot_count = 3;
  p.road_spacing_cells = 8;
  return p;
}

PresetParams preset_params(Preset preset) {
  switch (preset) {
    case Preset::benchmark: return benchmark_preset();
    case Preset::desk: return desk_preset();
    case Preset::custom: break;
  }
  throw ConfigError("preset: custom presets need explicit parameters");
}

namespace {

struct Bump {
  double row, col, sigma, amplitude;
};

GridD smooth_random_field(int n, int bumps, double min_amp, double max_amp, Rng& rng) {
  std::uniform_real_distribution<double> pos(0.0, n);
  std::uniform_real_distribution<double> amp(min_amp, max_amp);
  std::uniform_real_distribution<double> width(0.08 * n, 0.25 * n);
  std::vector<Bump> list;
  for (int i = 0; i < bumps; ++i) list.push_back({pos(rng), pos(rng), width(rng), amp(rng)});

  GridD field = GridD::Zero(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      double v = 0.0;
      for (const auto& b : list) {
        const double dr = r + 0.5 - b.row;
        const double dc = c + 0.5 - b.col;
        v += b.amplitude * std::exp(-(dr * dr + dc * dc) / (2.0 * b.sigma * b.sigma));
      }
      field(r, c) = v;
    }
  }
  return field;
}

GridD make_elevation(int n, Rng& rng) {
  GridD elev = smooth_random_field(n, 8, -10.0, 15.0, rng);

  const double tilt_angle = 2.0 * std::numbers::pi * uniform01(rng);
  const double tilt = 15.0;
  // sinuous river valley
  const bool horizontal = uniform01(rng) < 0.5;
  const double base = (0.3 + 0.4 * uniform01(rng)) * n;
  const double amplitude = (0.05 + 0.1 * uniform01(rng)) * n;
  const double phase = 2.0 * std::numbers::pi * uniform01(rng);
  const double half_width = 0.06 * n;

  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const double u = (c + 0.5) / n;
      const double v = (r + 0.5) / n;
      const double along = horizontal ? c + 0.5 : r + 0.5;
      const double across = horizontal ? r + 0.5 : c + 0.5;
      const double centre = base + amplitude * std::sin(2.0 * std::numbers::pi * along / n + phase);
      const double d = (across - centre) / half_width;
      elev(r, c) += tilt * (std::cos(tilt_angle) * u + std::sin(tilt_angle) * v) -
                    8.0 * std::exp(-0.5 * d * d);
    }
  }
  elev -= elev.minCoeff();
  return elev;
}

GridB make_roads(const PresetParams& p, Rng& rng) {
  const int n = p.side_cells;
  GridB road = GridB::Constant(n, n, false);
  const int spacing = p.road_spacing_cells;
  std::uniform_int_distribution<int> jitter(0, std::max(0, spacing / 2));
  for (int line = jitter(rng); line < n; line += spacing + jitter(rng) - spacing / 4) {
    road.row(line).setConstant(true);
  }
  for (int line = jitter(rng); line < n; line += spacing + jitter(rng) - spacing / 4) {
    road.col(line).setConstant(true);
  }
  // randomly placed obstacles break the road network
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      if (road(r, c) && uniform01(rng) < p.road_gap_probability) road(r, c) = false;
    }
  }
  return road;
}

std::vector<Cell> poisson_disc_centres(int n, int count, Rng& rng) {
  std::uniform_real_distribution<double> pos(1.0, n - 1.0);
  std::vector<Cell> centres;
  double min_dist = 0.7 * n / std::sqrt(static_cast<double>(count));
  while (static_cast<int>(centres.size()) < count) {
    bool placed = false;
    for (int attempt = 0; attempt < 60 && !placed; ++attempt) {
      const Cell c{static_cast<int>(pos(rng)), static_cast<int>(pos(rng))};
      const bool clear = std::all_of(centres.begin(), centres.end(), [&](Cell o) {
        return std::hypot(c.row - o.row, c.col - o.col) >= min_dist;
      });
      if (clear) {
        centres.push_back(c);
        placed = true;
      }
    }
    if (!placed) min_dist *= 0.8;
  }
  return centres;
}

Cell clamp_cell(double row, double col, int n) {
  return {std::clamp(static_cast<int>(std::lround(row)), 0, n - 1),
          std::clamp(static_cast<int>(std::lround(col)), 0, n - 1)};
}

std::vector<SurvivorGroup> make_survivors(const PresetParams& p, Rng& rng) {
  std::vector<SurvivorGroup> groups;
  if (p.survivor_count == 0) return groups;
  const int n = p.side_cells;
  const int group_count = (p.survivor_count + p.mean_group_size - 1) / p.mean_group_size;
  const auto centres = poisson_disc_centres(n, p.cluster_count, rng);

  std::vector<int> sizes(group_count, 1);
  std::uniform_int_distribution<int> pick_group(0, group_count - 1);
  for (int i = group_count; i < p.survivor_count; ++i) ++sizes[pick_group(rng)];

  std::uniform_int_distribution<int> pick_centre(0, static_cast<int>(centres.size()) - 1);
  std::normal_distribution<double> scatter(0.0, p.cluster_spread_cells);
  for (int size : sizes) {
    const Cell centre = centres[pick_centre(rng)];
    groups.push_back({clamp_cell(centre.row + scatter(rng), centre.col + scatter(rng), n), size});
  }
  return groups;
}

std::vector<Cell> pick_spread_cells(const std::vector<Cell>& candidates, int count, int n, Rng& rng) {
  std::vector<Cell> picked;
  std::uniform_int_distribution<std::size_t> any(0, candidates.size() - 1);
  double min_dist = n / (1.5 * std::sqrt(static_cast<double>(count)));
  while (static_cast<int>(picked.size()) < count) {
    bool placed = false;
    for (int attempt = 0; attempt < 80 && !placed; ++attempt) {
      const Cell c = candidates[any(rng)];
      const bool clear = std::all_of(picked.begin(), picked.end(), [&](Cell o) {
        return std::hypot(c.row - o.row, c.col - o.col) >= min_dist;
      });
      if (clear) {
        picked.push_back(c);
        placed = true;
      }
    }
    if (!placed) min_dist *= 0.8;
  }
  return picked;
}

}  // namespace

ScenarioSpec generate_scenario(std::uint64_t seed, HazardKind kind, const PresetParams& p) {
  p.validate();
  Rng rng = make_rng(seed, Stream::scenario);
  const int n = p.side_cells;

  ScenarioSpec spec;
  spec.seed = seed;
  spec.hazard_kind = kind;
  spec.grid = {n, p.cell_size_m};
  spec.terrain.elevation = make_elevation(n, rng);
  spec.terrain.road = make_roads(p, rng);

  GridD fuel = smooth_random_field(n, 10, 0.0, 1.0, rng);
  const double lo = fuel.minCoeff();
  const double hi = fuel.maxCoeff();
  fuel = hi > lo ? ((fuel - lo) / (hi - lo)).eval() : GridD::Constant(n, n, 0.5);
  fuel = 0.3 + 0.7 * fuel;
  spec.terrain.fuel = spec.terrain.road.select(0.2 * fuel, fuel);

  auto& h = spec.hazard;
  h.blockage_depth_m = p.blockage_depth_m;
  h.burn_duration_ticks = p.burn_duration_ticks;
  h.perturbation_probability = p.perturbation_probability;
  if (kind == HazardKind::flood) {
    h.rainfall_mm_per_tick = p.rainfall_mm_per_tick;
    // storm cell centred on the highest of a few random candidates so water runs downhill across the map
    std::uniform_int_distribution<int> any(0, n - 1);
    Cell centre{any(rng), any(rng)};
    for (int i = 0; i < 4; ++i) {
      const Cell c{any(rng), any(rng)};
      if (spec.terrain.elevation(c.row, c.col) > spec.terrain.elevation(centre.row, centre.col)) centre = c;
    }
    const double radius = p.storm_radius_fraction * n;
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) {
        if (std::hypot(r - centre.row, c - centre.col) <= radius) h.sources.push_back({r, c});
      }
    }
  } else {
    h.base_spread_probability = p.base_spread_probability;
    h.wind_direction_deg = 360.0 * uniform01(rng);
    h.wind_speed = p.max_wind_speed * (0.25 + 0.75 * uniform01(rng));
    std::uniform_int_distribution<int> any(0, n - 1);
    for (int i = 0; i < p.ignition_count; ++i) h.ignitions.push_back({any(rng), any(rng)});
  }

  spec.survivors = make_survivors(p, rng);

  std::vector<Cell> road_cells;
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      if (spec.terrain.road(r, c)) road_cells.push_back({r, c});
    }
  }
  if (road_cells.empty()) {
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) road_cells.push_back({r, c});
    }
  }
  const auto depot_cells = pick_spread_cells(road_cells, p.depot_count, n, rng);
  for (std::size_t i = 0; i < depot_cells.size(); ++i) {
    const int share = p.supply_total / p.depot_count + (static_cast<int>(i) < p.supply_total % p.depot_count);
    spec.depots.push_back({depot_cells[i], share});
  }
  spec.supply_total = p.supply_total;

  for (int i = 0; i < p.ground_vehicles; ++i) {
    spec.vehicles.push_back({VehicleClass::ground, depot_cells[i % depot_cells.size()], kGroundCapacity,
                             kGroundRoadSpeedKmh});
  }
  for (int i = 0; i < p.drones; ++i) {
    spec.vehicles.push_back({VehicleClass::drone, depot_cells[i % depot_cells.size()], kDroneCapacity,
                             kDroneSpeedKmh});
  }
  return spec;
}

ScenarioSpec generate_scenario(std::uint64_t seed, HazardKind kind, Preset preset) {
  return generate_scenario(seed, kind, preset_params(preset));
}

}  // namespace rescue
