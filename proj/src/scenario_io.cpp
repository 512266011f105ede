#include "rescue/errors.hpp"
#include "rescue/scenario.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace rescue {

using nlohmann::json;

namespace {

json cell_json(Cell c) { return json::array({c.row, c.col}); }

template <typename Scalar>
json raster_json(const Grid<Scalar>& grid) {
  json out = json::array();
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    if constexpr (std::is_same_v<Scalar, bool>) {
      out.push_back(grid.data()[i] ? 1 : 0);
    } else {
      out.push_back(grid.data()[i]);
    }
  }
  return out;
}

// Field access that reports the JSON path on failure.
const json& field(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw ParseError("field '" + path + "': expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError("field '" + path + "." + key + "': missing");
  return *it;
}

template <typename T>
T as(const json& value, const std::string& path) {
  try {
    return value.get<T>();
  } catch (const json::exception& e) {
    throw ParseError("field '" + path + "': " + e.what());
  }
}

Cell as_cell(const json& value, const std::string& path) {
  if (!value.is_array() || value.size() != 2) throw ParseError("field '" + path + "': expected [row, col]");
  return {as<int>(value[0], path), as<int>(value[1], path)};
}

template <typename Scalar>
Grid<Scalar> as_raster(const json& value, int side, const std::string& path) {
  if (!value.is_array()) throw ParseError("field '" + path + "': expected an array");
  if (value.size() != static_cast<std::size_t>(side) * side) {
    throw ParseError("field '" + path + "': expected " + std::to_string(side * side) + " entries, got " +
                     std::to_string(value.size()));
  }
  Grid<Scalar> grid(side, side);
  for (std::size_t i = 0; i < value.size(); ++i) {
    if constexpr (std::is_same_v<Scalar, bool>) {
      grid.data()[i] = as<int>(value[i], path) != 0;
    } else {
      grid.data()[i] = as<Scalar>(value[i], path);
    }
  }
  return grid;
}

json summary_json(const ScenarioSpec& spec) {
  return {{"survivor_groups", spec.survivors.size()},
          {"survivors", spec.total_survivors()},
          {"depots", spec.depots.size()},
          {"ground_vehicles", spec.count_vehicles(VehicleClass::ground)},
          {"drones", spec.count_vehicles(VehicleClass::drone)}};
}

std::size_t line_of(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + byte, '\n'));
}

}  // namespace

std::string scenario_to_text(const ScenarioSpec& spec) {
  const auto& h = spec.hazard;
  json sources = json::array();
  for (auto c : h.sources) sources.push_back(cell_json(c));
  json ignitions = json::array();
  for (auto c : h.ignitions) ignitions.push_back(cell_json(c));

  json survivors = json::array();
  for (const auto& g : spec.survivors) survivors.push_back({{"cell", cell_json(g.cell)}, {"size", g.size}});
  json depots = json::array();
  for (const auto& d : spec.depots) depots.push_back({{"cell", cell_json(d.cell)}, {"stock", d.stock}});
  json vehicles = json::array();
  for (const auto& v : spec.vehicles) {
    vehicles.push_back({{"class", std::string(to_string(v.cls))},
                        {"cell", cell_json(v.start)},
                        {"capacity", v.capacity},
                        {"speed_kmh", v.speed_kmh}});
  }

  json doc;
  doc["version"] = kScenarioFormatVersion;
  doc["seed"] = spec.seed;
  doc["summary"] = summary_json(spec);
  doc["grid"] = {{"side_cells", spec.grid.side_cells}, {"cell_size_m", spec.grid.cell_size_m}};
  doc["hazard"] = {{"kind", std::string(to_string(spec.hazard_kind))},
                   {"rainfall_mm_per_tick", h.rainfall_mm_per_tick},
                   {"blockage_depth_m", h.blockage_depth_m},
                   {"relaxation_passes", h.relaxation_passes},
                   {"sources", sources},
                   {"ignitions", ignitions},
                   {"wind_direction_deg", h.wind_direction_deg},
                   {"wind_speed", h.wind_speed},
                   {"base_spread_probability", h.base_spread_probability},
                   {"burn_duration_ticks", h.burn_duration_ticks},
                   {"perturbation_probability", h.perturbation_probability}};
  doc["survivors"] = survivors;
  doc["depots"] = depots;
  doc["vehicles"] = vehicles;
  doc["supply_total"] = spec.supply_total;
  doc["terrain"] = {{"elevation", raster_json(spec.terrain.elevation)},
                    {"fuel", raster_json(spec.terrain.fuel)},
                    {"road", raster_json(spec.terrain.road)}};
  return doc.dump() + "\n";
}

ScenarioSpec scenario_from_text(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError("line " + std::to_string(line_of(text, e.byte)) + ": " + e.what());
  }

  const int version = as<int>(field(doc, "version", ""), "version");
  if (version != kScenarioFormatVersion) {
    throw ParseError("field 'version': unsupported version " + std::to_string(version));
  }

  ScenarioSpec spec;
  spec.seed = as<std::uint64_t>(field(doc, "seed", ""), "seed");

  const auto& grid = field(doc, "grid", "");
  spec.grid.side_cells = as<int>(field(grid, "side_cells", "grid"), "grid.side_cells");
  spec.grid.cell_size_m = as<double>(field(grid, "cell_size_m", "grid"), "grid.cell_size_m");
  const int n = spec.grid.side_cells;
  if (n < 4) throw ValidationError("grid.side_cells: must be at least 4");

  const auto& terrain = field(doc, "terrain", "");
  spec.terrain.elevation = as_raster<double>(field(terrain, "elevation", "terrain"), n, "terrain.elevation");
  spec.terrain.fuel = as_raster<double>(field(terrain, "fuel", "terrain"), n, "terrain.fuel");
  spec.terrain.road = as_raster<bool>(field(terrain, "road", "terrain"), n, "terrain.road");

  const auto& hz = field(doc, "hazard", "");
  try {
    spec.hazard_kind = parse_hazard_kind(as<std::string>(field(hz, "kind", "hazard"), "hazard.kind"));
  } catch (const ConfigError& e) {
    throw ParseError(std::string("field 'hazard.kind': ") + e.what());
  }
  auto& h = spec.hazard;
  h.rainfall_mm_per_tick = as<double>(field(hz, "rainfall_mm_per_tick", "hazard"), "hazard.rainfall_mm_per_tick");
  h.blockage_depth_m = as<double>(field(hz, "blockage_depth_m", "hazard"), "hazard.blockage_depth_m");
  h.relaxation_passes = as<int>(field(hz, "relaxation_passes", "hazard"), "hazard.relaxation_passes");
  for (const auto& c : field(hz, "sources", "hazard")) h.sources.push_back(as_cell(c, "hazard.sources"));
  for (const auto& c : field(hz, "ignitions", "hazard")) h.ignitions.push_back(as_cell(c, "hazard.ignitions"));
  h.wind_direction_deg = as<double>(field(hz, "wind_direction_deg", "hazard"), "hazard.wind_direction_deg");
  h.wind_speed = as<double>(field(hz, "wind_speed", "hazard"), "hazard.wind_speed");
  h.base_spread_probability =
      as<double>(field(hz, "base_spread_probability", "hazard"), "hazard.base_spread_probability");
  h.burn_duration_ticks = as<int>(field(hz, "burn_duration_ticks", "hazard"), "hazard.burn_duration_ticks");
  h.perturbation_probability =
      as<double>(field(hz, "perturbation_probability", "hazard"), "hazard.perturbation_probability");

  for (const auto& g : field(doc, "survivors", "")) {
    spec.survivors.push_back({as_cell(field(g, "cell", "survivors"), "survivors.cell"),
                              as<int>(field(g, "size", "survivors"), "survivors.size")});
  }
  for (const auto& d : field(doc, "depots", "")) {
    spec.depots.push_back({as_cell(field(d, "cell", "depots"), "depots.cell"),
                           as<int>(field(d, "stock", "depots"), "depots.stock")});
  }
  for (const auto& v : field(doc, "vehicles", "")) {
    VehicleSpec vs;
    try {
      vs.cls = parse_vehicle_class(as<std::string>(field(v, "class", "vehicles"), "vehicles.class"));
    } catch (const ConfigError& e) {
      throw ParseError(std::string("field 'vehicles.class': ") + e.what());
    }
    vs.start = as_cell(field(v, "cell", "vehicles"), "vehicles.cell");
    vs.capacity = as<int>(field(v, "capacity", "vehicles"), "vehicles.capacity");
    vs.speed_kmh = as<double>(field(v, "speed_kmh", "vehicles"), "vehicles.speed_kmh");
    spec.vehicles.push_back(vs);
  }
  spec.supply_total = as<int>(field(doc, "supply_total", ""), "supply_total");

  validate(spec);

  if (auto it = doc.find("summary"); it != doc.end()) {
    const json expected = summary_json(spec);
    for (const auto& [key, value] : expected.items()) {
      if (it->contains(key) && (*it)[key] != value) {
        throw ValidationError("summary." + key + ": header says " + (*it)[key].dump() + ", content has " +
                              value.dump());
      }
    }
  }
  return spec;
}

void write_scenario(const ScenarioSpec& spec, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << scenario_to_text(spec);
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

ScenarioSpec read_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return scenario_from_text(buffer.str());
}

ScenarioSpec roundtrip_scenario(const ScenarioSpec& spec, const std::filesystem::path& path) {
  write_scenario(spec, path);
  return read_scenario(path);
}

}  // namespace rescue
