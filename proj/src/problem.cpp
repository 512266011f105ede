#include "rescue/errors.hpp"
#include "rescue/optimizer.hpp"

namespace rescue {

namespace {

bool is_uniform(const CostMap& costs) {
  return costs.seconds.size() > 0 && (costs.seconds == costs.seconds(0, 0)).all() &&
         std::isfinite(costs.seconds(0, 0));
}

}  // namespace

void DecisionProblem::prepare() {
  FieldCache ground_fields(ground_costs);
  prepare(ground_fields);
}

void DecisionProblem::prepare(FieldCache& ground_fields) {
  const int v_count = vehicle_count();
  const int k_count = zone_count();
  const int t_count = static_cast<int>(targets.size());
  const int n = ground_costs.side();

  travel.target_zone.assign(t_count, kIdle);
  travel.zone_severity.resize(k_count);
  travel.zone_survivors.setZero(k_count);
  for (int z = 0; z < k_count; ++z) {
    travel.zone_severity(z) = zones[z].severity;
    for (int t : zones[z].targets) {
      if (t < 0 || t >= t_count) throw ContractError("DecisionProblem: zone target index out of range");
      travel.target_zone[t] = z;
      travel.zone_survivors(z) += targets[t].survivors;
    }
  }

  travel.time_scale.resize(v_count);
  for (int v = 0; v < v_count; ++v) {
    const auto& m = vehicles[v];
    if (!in_bounds(m.position, n)) throw ContractError("DecisionProblem: vehicle position out of bounds");
    const double reference = m.cls == VehicleClass::ground ? kGroundRoadSpeedKmh : kDroneSpeedKmh;
    travel.time_scale(v) = reference / m.speed_kmh;
  }

  // Drone travel is analytic on a uniform map; anything else goes through Dijkstra.
  const bool drone_uniform = is_uniform(drone_costs);
  const double drone_cell = drone_uniform ? drone_costs.seconds(0, 0) : 0.0;
  std::optional<FieldCache> drone_fields;
  if (!drone_uniform) drone_fields.emplace(drone_costs);

  auto drone_time = [&](Cell from, Cell to) {
    if (drone_uniform) return octile(from, to) * drone_cell;
    return drone_fields->to(to)(from.row, from.col);
  };

  travel.vehicle_target.resize(v_count, t_count);
  travel.ground_between.resize(t_count, t_count);
  travel.drone_between.resize(t_count, t_count);
  for (int t = 0; t < t_count; ++t) {
    const Cell target = targets[t].cell;
    const GridD& field = ground_fields.to(target);
    for (int u = 0; u < t_count; ++u) {
      const Cell from = targets[u].cell;
      travel.ground_between(u, t) = field(from.row, from.col);
      travel.drone_between(u, t) = drone_time(from, target);
    }
    for (int v = 0; v < v_count; ++v) {
      const auto& m = vehicles[v];
      const double base = m.cls == VehicleClass::ground ? field(m.position.row, m.position.col)
                                                        : drone_time(m.position, target);
      travel.vehicle_target(v, t) = base * travel.time_scale(v);
    }
  }

  travel.vehicle_anchor.resize(v_count, k_count);
  travel.zone_reachable.resize(v_count, k_count);
  for (int z = 0; z < k_count; ++z) {
    const Cell anchor = zones[z].anchor;
    const GridD& field = ground_fields.to(anchor);
    for (int v = 0; v < v_count; ++v) {
      const auto& m = vehicles[v];
      const double base = m.cls == VehicleClass::ground ? field(m.position.row, m.position.col)
                                                        : drone_time(m.position, anchor);
      travel.vehicle_anchor(v, z) = base * travel.time_scale(v);

      bool reachable = false;
      if (zones[z].targets.empty()) {
        reachable = std::isfinite(travel.vehicle_anchor(v, z));
      } else {
        for (int t : zones[z].targets) reachable = reachable || std::isfinite(travel.vehicle_target(v, t));
      }
      travel.zone_reachable(v, z) = reachable;
    }
  }
}

}  // namespace rescue
