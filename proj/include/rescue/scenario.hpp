#pragma once

#include "rescue/grid.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace rescue {

enum class HazardKind { flood, wildfire };
enum class VehicleClass { ground, drone };

std::string_view to_string(HazardKind kind);
std::string_view to_string(VehicleClass cls);
HazardKind parse_hazard_kind(std::string_view text);
VehicleClass parse_vehicle_class(std::string_view text);

struct GridSpec {
  int side_cells = 100;
  double cell_size_m = 100.0;

  double area_km2() const {
    const double side_km = side_cells * cell_size_m / 1000.0;
    return side_km * side_km;
  }

  bool operator==(const GridSpec&) const = default;
};

/// Nearest square grid to the requested area.
int side_cells_for_area(double area_km2, double cell_size_m = 100.0);

struct TerrainField {
  GridD elevation;  // meters
  GridD fuel;       // [0, 1]
  GridB road;
};

bool operator==(const TerrainField& a, const TerrainField& b);

struct HazardParams {
  // flood
  double rainfall_mm_per_tick = 0.0;
  double blockage_depth_m = 0.3;
  std::vector<Cell> sources;
  int relaxation_passes = 2;

  // wildfire
  std::vector<Cell> ignitions;
  double wind_direction_deg = 0.0;  // direction the wind blows toward; 0 = east (+col), 90 = south (+row)
  double wind_speed = 0.0;          // normalized to [0, 1]
  double base_spread_probability = 0.0;
  int burn_duration_ticks = 4;

  // random extra ground blockages redrawn each tick
  double perturbation_probability = 0.01;

  bool operator==(const HazardParams&) const = default;
};

struct SurvivorGroup {
  Cell cell;
  int size = 0;
  bool operator==(const SurvivorGroup&) const = default;
};

struct Depot {
  Cell cell;
  int stock = 0;
  bool operator==(const Depot&) const = default;
};

struct VehicleSpec {
  VehicleClass cls = VehicleClass::ground;
  Cell start;
  int capacity = 0;
  double speed_kmh = 0.0;
  bool operator==(const VehicleSpec&) const = default;
};

struct ScenarioSpec {
  GridSpec grid;
  TerrainField terrain;
  HazardKind hazard_kind = HazardKind::flood;
  HazardParams hazard;
  std::vector<SurvivorGroup> survivors;
  std::vector<Depot> depots;
  std::vector<VehicleSpec> vehicles;
  int supply_total = 0;
  std::uint64_t seed = 0;

  int total_survivors() const;
  int count_vehicles(VehicleClass cls) const;
};

bool operator==(const ScenarioSpec& a, const ScenarioSpec& b);

/// Throws ValidationError naming the first offending field.
void validate(const ScenarioSpec& spec);

// Defaults for generated fleets.
inline constexpr double kGroundRoadSpeedKmh = 40.0;
inline constexpr double kOffRoadFactor = 0.5;  // ground speed off road = 20 km/h
inline constexpr double kDroneSpeedKmh = 80.0;
inline constexpr int kGroundCapacity = 30;
inline constexpr int kDroneCapacity = 5;

/// Every knob of the synthetic generator. `benchmark` and `desk` are the two named presets.
struct PresetParams {
  int side_cells = 100;
  double cell_size_m = 100.0;
  int ground_vehicles = 60;
  int drones = 12;
  int survivor_count = 6000;
  int mean_group_size = 2;
  int cluster_count = 20;
  double cluster_spread_cells = 2.5;
  int supply_total = 1200;
  int depot_count = 6;

  int road_spacing_cells = 10;
  double road_gap_probability = 0.03;  // perturbation of obstacle placement

  double rainfall_mm_per_tick = 8.0;
  double blockage_depth_m = 0.3;
  double storm_radius_fraction = 0.35;

  int ignition_count = 3;
  double base_spread_probability = 0.35;
  double max_wind_speed = 0.8;
  int burn_duration_ticks = 4;

  double perturbation_probability = 0.01;

  void validate() const;  // throws ConfigError
  bool operator==(const PresetParams&) const = default;
};

enum class Preset { benchmark, desk, custom };

std::string_view to_string(Preset preset);
Preset parse_preset(std::string_view text);

PresetParams benchmark_preset();
PresetParams desk_preset();
PresetParams preset_params(Preset preset);

ScenarioSpec generate_scenario(std::uint64_t seed, HazardKind kind, const PresetParams& params);
ScenarioSpec generate_scenario(std::uint64_t seed, HazardKind kind, Preset preset);

// File format

inline constexpr int kScenarioFormatVersion = 1;

std::string scenario_to_text(const ScenarioSpec& spec);
ScenarioSpec scenario_from_text(std::string_view text);

void write_scenario(const ScenarioSpec& spec, const std::filesystem::path& path);
ScenarioSpec read_scenario(const std::filesystem::path& path);

/// Writes then reads back.
ScenarioSpec roundtrip_scenario(const ScenarioSpec& spec, const std::filesystem::path& path);

}  // namespace rescue
