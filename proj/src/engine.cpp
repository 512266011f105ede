#include "rescue/engine.hpp"

#include "rescue/errors.hpp"
#include "rescue/router.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <memory>
#include <optional>

namespace rescue {

namespace {

constexpr std::pair<Policy, std::string_view> kPolicyNames[] = {
    {Policy::hybrid, "hybrid"},
    {Policy::perception_only, "perception_only"},
    {Policy::pso_only, "pso_only"},
    {Policy::simulated_annealing, "simulated_annealing"},
};

constexpr std::pair<EventType, std::string_view> kEventNames[] = {
    {EventType::tick, "tick"},       {EventType::block, "block"},     {EventType::unblock, "unblock"},
    {EventType::move, "move"},       {EventType::reach, "reach"},     {EventType::deliver, "deliver"},
    {EventType::reload, "reload"},   {EventType::lost, "lost"},
};

enum class GroupStatus : std::uint8_t { pending, reached, lost };

struct Vehicle {
  VehicleClass cls = VehicleClass::ground;
  Cell cell;
  int load = 0;
  int capacity = 0;
  double speed_kmh = 0.0;
  double credit_s = 0.0;  // progress already made toward the next cell
  std::vector<Cell> route;
  std::size_t next = 0;
};

class Episode {
 public:
  Episode(const ScenarioSpec& scenario, const EngineConfig& config, const TickObserver& observer)
      : spec_(std::make_shared<const ScenarioSpec>(scenario)),
        config_(config),
        observer_(observer),
        world_(initial_world(spec_)),
        hazard_rng_(make_rng(config.seed, Stream::hazard)),
        perception_rng_(make_rng(config.seed, Stream::perception)),
        optimizer_rng_(make_rng(config.seed, Stream::optimizer)),
        drone_costs_(make_cost_map(world_, VehicleClass::drone, kDroneSpeedKmh)),
        drone_fields_(drone_costs_) {
    const int n = spec_->grid.side_cells;
    status_.assign(spec_->survivors.size(), GroupStatus::pending);
    for (std::size_t g = 0; g < spec_->survivors.size(); ++g) {
      groups_at_[linear_index(spec_->survivors[g].cell, n)].push_back(static_cast<int>(g));
    }
    depots_ = spec_->depots;
    for (std::size_t d = 0; d < depots_.size(); ++d) depot_at_[linear_index(depots_[d].cell, n)] = static_cast<int>(d);
    for (const auto& v : spec_->vehicles) {
      vehicles_.push_back({v.cls, v.start, 0, v.capacity, v.speed_kmh, 0.0, {}, 0});
      result_.artifacts.tracks.push_back({v.cls, {{0, v.start}}});
    }

    auto& log = result_.log;
    log.total_survivors = spec_->total_survivors();
    log.supply_total = spec_->supply_total;
    log.horizon_ticks = config_.horizon_ticks;
    log.tick_seconds = kTickSeconds;
    previous_blocked_ = GridB::Constant(n, n, false);
  }

  DecisionProblem first_problem() {
    const CostMap ground = make_cost_map(world_, VehicleClass::ground, kGroundRoadSpeedKmh);
    FieldCache ground_fields(ground);
    std::vector<bool> pending(status_.size(), true);
    const Observation obs = observe(world_, pending, config_.sensors, perception_rng_);
    auto zones = segment_zones(extract_priority_map(obs, config_.kernel), config_.zone_threshold, config_.max_zones,
                               world_.side());
    attach_detections(zones, obs);
    DecisionProblem problem = base_problem(0, ground);
    add_zone_targets(problem, zones, obs);
    problem.prepare(ground_fields);
    return problem;
  }

  EpisodeResult run() {
    for (std::size_t v = 0; v < vehicles_.size(); ++v) arrive(static_cast<int>(v), 0, 0.0);
    mark_lost(0, 0.0);

    for (int t = 0; t < config_.horizon_ticks && pending_count() > 0; ++t) {
      record(t, 0.0, EventType::tick, -1, {-1, -1});
      log_blockage(t);

      const CostMap ground = make_cost_map(world_, VehicleClass::ground, kGroundRoadSpeedKmh);
      FieldCache ground_fields(ground);
      std::optional<PriorityMap> priority;
      if (t % config_.replan_interval_ticks == 0) priority = replan(t, ground, ground_fields);

      for (std::size_t v = 0; v < vehicles_.size(); ++v) move(static_cast<int>(v), t, ground, ground_fields);

      world_ = step_world(world_, hazard_rng_);
      mark_lost(t, kTickSeconds);

      if (observer_) {
        TickView view;
        view.tick = t;
        view.world = &world_;
        view.priority = priority ? &*priority : nullptr;
        view.survivors_reached = survivors_reached_;
        view.supplies_delivered = delivered_;
        for (const auto& v : vehicles_) view.supplies_on_vehicles += v.load;
        for (const auto& d : depots_) view.supplies_in_depots += d.stock;
        observer_(view);
      }
    }

    result_.metrics = compute_metrics(result_.log);
    return std::move(result_);
  }

 private:
  int pending_count() const {
    return static_cast<int>(std::count(status_.begin(), status_.end(), GroupStatus::pending));
  }

  void record(int tick, double offset_s, EventType event, int vehicle, Cell cell, int survivors = 0,
              int supplies = 0) {
    const double time_min = (tick * kTickSeconds + offset_s) / 60.0;
    result_.log.records.push_back({tick, time_min, event, vehicle, cell, survivors, supplies});
  }

  void log_blockage(int t) {
    const GridB blocked = world_.ground_blocked();
    const int n = world_.side();
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) {
        if (blocked(r, c) == previous_blocked_(r, c)) continue;
        record(t, 0.0, blocked(r, c) ? EventType::block : EventType::unblock, -1, {r, c});
      }
    }
    previous_blocked_ = blocked;
  }

  // Groups whose cell is now flooded or on fire can no longer be reached.
  void mark_lost(int t, double offset_s) {
    for (std::size_t g = 0; g < status_.size(); ++g) {
      const auto& group = spec_->survivors[g];
      if (status_[g] != GroupStatus::pending || !world_.hazard_blocked(group.cell.row, group.cell.col)) continue;
      status_[g] = GroupStatus::lost;
      record(t, offset_s, EventType::lost, -1, group.cell, group.size);
    }
  }

  DecisionProblem base_problem(int t, const CostMap& ground) const {
    DecisionProblem p;
    for (const auto& v : vehicles_) p.vehicles.push_back({v.cls, v.cell, v.speed_kmh, v.load});
    p.ground_costs = ground;
    p.drone_costs = drone_costs_;
    p.depots = depots_;
    const int remaining = config_.horizon_ticks - t;
    p.horizon_ticks = config_.planning_horizon_ticks > 0 ? std::min(remaining, config_.planning_horizon_ticks) : remaining;
    p.tick_seconds = kTickSeconds;
    double supply = 0.0;
    for (const auto& v : vehicles_) supply += v.load;
    for (const auto& d : depots_) supply += d.stock;
    p.available_supply = supply;
    return p;
  }

  static void add_zone_targets(DecisionProblem& p, const std::vector<Zone>& zones, const Observation& obs) {
    for (const auto& z : zones) {
      PlanZone pz{z.severity, z.centroid, {}};
      for (int d : z.detections) {
        pz.targets.push_back(static_cast<int>(p.targets.size()));
        p.targets.push_back({obs.detections[d].cell, obs.detections[d].estimated_survivors});
      }
      p.zones.push_back(std::move(pz));
    }
  }

  // pso_only: detections are known only to their block; every block weighs the same.
  // Returns the problem the optimizer sees and the one used to route vehicles.
  std::pair<DecisionProblem, DecisionProblem> block_problems(int t, const CostMap& ground,
                                                             const Observation& obs) const {
    const int n = world_.side();
    const int b = config_.quantization_block;
    const int per_side = (n + b - 1) / b;
    std::map<int, std::vector<int>> members;
    for (std::size_t d = 0; d < obs.detections.size(); ++d) {
      const Cell c = obs.detections[d].cell;
      members[(c.row / b) * per_side + c.col / b].push_back(static_cast<int>(d));
    }

    DecisionProblem coarse = base_problem(t, ground);
    DecisionProblem fine = base_problem(t, ground);
    for (const auto& [block, dets] : members) {
      const int r0 = (block / per_side) * b, c0 = (block % per_side) * b;
      const int r1 = std::min(r0 + b, n), c1 = std::min(c0 + b, n);
      const double mid_r = 0.5 * (r0 + r1 - 1), mid_c = 0.5 * (c0 + c1 - 1);
      Cell centre{static_cast<int>(mid_r), static_cast<int>(mid_c)};
      double best = kInfinity;
      for (int r = r0; r < r1; ++r) {
        for (int c = c0; c < c1; ++c) {
          if (!ground.passable({r, c})) continue;
          const double d = std::hypot(r - mid_r, c - mid_c);
          if (d < best) {
            best = d;
            centre = {r, c};
          }
        }
      }

      int total = 0;
      PlanZone fz{1.0, centre, {}};
      for (int d : dets) {
        total += obs.detections[d].estimated_survivors;
        fz.targets.push_back(static_cast<int>(fine.targets.size()));
        fine.targets.push_back({obs.detections[d].cell, obs.detections[d].estimated_survivors});
      }
      coarse.zones.push_back({1.0, centre, {static_cast<int>(coarse.targets.size())}});
      coarse.targets.push_back({centre, total});
      fine.zones.push_back(std::move(fz));
    }
    return {std::move(coarse), std::move(fine)};
  }

  std::optional<PriorityMap> replan(int t, const CostMap& ground, FieldCache& ground_fields) {
    const bool snapshot = t == config_.snapshot_tick;
    std::vector<bool> pending(status_.size());
    for (std::size_t g = 0; g < status_.size(); ++g) pending[g] = status_[g] == GroupStatus::pending;

    const auto started = std::chrono::steady_clock::now();
    const Observation obs = observe(world_, pending, config_.sensors, perception_rng_);
    std::optional<PriorityMap> priority;
    std::vector<Zone> zones;
    Plan plan;
    std::vector<double> trace;

    if (config_.policy == Policy::pso_only) {
      auto [coarse, fine] = block_problems(t, ground, obs);
      coarse.prepare(ground_fields);
      fine.prepare(ground_fields);
      auto best = pso_optimize(coarse, config_.swarm, optimizer_rng_, config_.weights);
      plan = build_plan(best.plan.assignment, best.plan.supply_share, fine);
      trace = std::move(best.trace);
    } else {
      priority = extract_priority_map(obs, config_.kernel);
      zones = segment_zones(*priority, config_.zone_threshold, config_.max_zones, world_.side());
      attach_detections(zones, obs);
      DecisionProblem problem = base_problem(t, ground);
      add_zone_targets(problem, zones, obs);
      problem.prepare(ground_fields);
      switch (config_.policy) {
        case Policy::hybrid: {
          auto best = pso_optimize(problem, config_.swarm, optimizer_rng_, config_.weights);
          plan = std::move(best.plan);
          trace = std::move(best.trace);
          break;
        }
        case Policy::simulated_annealing: {
          auto best = sa_optimize(problem, AnnealConfig::matched(config_.swarm), optimizer_rng_, config_.weights);
          plan = std::move(best.plan);
          trace = std::move(best.trace);
          break;
        }
        default: plan = greedy_plan(problem); break;
      }
    }
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - started;
    result_.log.latency_s.push_back(elapsed.count());

    for (std::size_t v = 0; v < vehicles_.size(); ++v) {
      auto& vehicle = vehicles_[v];
      std::vector<Cell> route;
      if (config_.commit_to_leg && vehicle.next < vehicle.route.size() && has_pending(vehicle.route[vehicle.next])) {
        route.push_back(vehicle.route[vehicle.next]);
      }
      for (const auto& stop : plan.routes[v]) {
        if (route.empty() || stop.cell != route.front()) route.push_back(stop.cell);
      }
      vehicle.route = std::move(route);
      vehicle.next = 0;
    }

    if (snapshot) {
      auto& art = result_.artifacts;
      art.has_snapshot = true;
      art.snapshot_tick = t;
      art.priority = priority ? *priority : extract_priority_map(obs, config_.kernel);
      if (zones.empty() && !priority) {
        zones = segment_zones(art.priority, config_.zone_threshold, config_.max_zones, world_.side());
        attach_detections(zones, obs);
      }
      art.detections = obs.detections;
      art.zones = std::move(zones);
      art.convergence = std::move(trace);
    }
    return priority;
  }

  bool has_pending(Cell cell) const {
    const auto it = groups_at_.find(linear_index(cell, world_.side()));
    if (it == groups_at_.end()) return false;
    return std::any_of(it->second.begin(), it->second.end(),
                       [&](int g) { return status_[g] == GroupStatus::pending; });
  }

  // Reach, deliver and reload at the vehicle's current cell.
  void arrive(int v, int t, double offset_s) {
    auto& vehicle = vehicles_[v];
    const int n = world_.side();
    const Eigen::Index key = linear_index(vehicle.cell, n);

    if (auto it = groups_at_.find(key); it != groups_at_.end()) {
      for (int g : it->second) {
        if (status_[g] != GroupStatus::pending) continue;
        const int size = spec_->survivors[g].size;
        status_[g] = GroupStatus::reached;
        survivors_reached_ += size;
        record(t, offset_s, EventType::reach, v, vehicle.cell, size);
        const int units = std::min(vehicle.load, (size + kSurvivorsPerSupplyUnit - 1) / kSurvivorsPerSupplyUnit);
        if (units > 0) {
          vehicle.load -= units;
          delivered_ += units;
          record(t, offset_s, EventType::deliver, v, vehicle.cell, 0, units);
        }
      }
    }

    if (auto it = depot_at_.find(key); it != depot_at_.end()) {
      auto& depot = depots_[it->second];
      const int units = std::min(depot.stock, vehicle.capacity - vehicle.load);
      if (units > 0) {
        depot.stock -= units;
        vehicle.load += units;
        record(t, offset_s, EventType::reload, v, vehicle.cell, 0, units);
      }
    }
  }

  void move(int v, int t, const CostMap& ground, FieldCache& ground_fields) {
    auto& vehicle = vehicles_[v];
    const bool drone = vehicle.cls == VehicleClass::drone;
    const CostMap& costs = drone ? drone_costs_ : ground;
    FieldCache& fields = drone ? drone_fields_ : ground_fields;
    const double reference = drone ? kDroneSpeedKmh : kGroundRoadSpeedKmh;
    const double scale = reference / vehicle.speed_kmh;

    const double carried = vehicle.credit_s;
    double budget = kTickSeconds + carried;
    double spent = 0.0;
    vehicle.credit_s = 0.0;

    while (vehicle.next < vehicle.route.size()) {
      const Cell dest = vehicle.route[vehicle.next];
      if (dest == vehicle.cell) {
        ++vehicle.next;
        continue;
      }
      const GridD& field = fields.to(dest);
      const auto step = std::isfinite(field(vehicle.cell.row, vehicle.cell.col))
                            ? descend(costs, field, vehicle.cell)
                            : std::nullopt;
      if (!step) {
        ++vehicle.next;
        continue;
      }
      const double cost = step_cost(costs, vehicle.cell, *step) * scale;
      if (cost > budget) {
        vehicle.credit_s = budget;
        break;
      }
      budget -= cost;
      spent += cost;
      vehicle.cell = *step;
      const double offset = std::clamp(spent - carried, 0.0, kTickSeconds);
      record(t, offset, EventType::move, v, vehicle.cell);
      result_.artifacts.tracks[v].points.push_back({t, vehicle.cell});
      arrive(v, t, offset);
    }
  }

  std::shared_ptr<const ScenarioSpec> spec_;
  const EngineConfig& config_;
  const TickObserver& observer_;
  WorldState world_;
  Rng hazard_rng_;
  Rng perception_rng_;
  Rng optimizer_rng_;
  CostMap drone_costs_;
  FieldCache drone_fields_;  // drone costs never change

  std::vector<GroupStatus> status_;
  std::map<Eigen::Index, std::vector<int>> groups_at_;
  std::map<Eigen::Index, int> depot_at_;
  std::vector<Depot> depots_;
  std::vector<Vehicle> vehicles_;
  GridB previous_blocked_;
  int survivors_reached_ = 0;
  int delivered_ = 0;
  EpisodeResult result_;
};

}  // namespace

std::string_view to_string(Policy policy) {
  for (const auto& [p, name] : kPolicyNames) {
    if (p == policy) return name;
  }
  return "unknown";
}

Policy parse_policy(std::string_view text) {
  for (const auto& [p, name] : kPolicyNames) {
    if (name == text) return p;
  }
  throw ConfigError("policy: unknown value '" + std::string(text) + "'");
}

std::string_view to_string(EventType event) {
  for (const auto& [e, name] : kEventNames) {
    if (e == event) return name;
  }
  return "unknown";
}

EventType parse_event(std::string_view text) {
  for (const auto& [e, name] : kEventNames) {
    if (name == text) return e;
  }
  throw ParseError("event: unknown value '" + std::string(text) + "'");
}

void EngineConfig::validate() const {
  if (horizon_ticks < 1) throw ConfigError("horizon_ticks: must be at least 1");
  if (replan_interval_ticks < 1) throw ConfigError("replan_interval_ticks: must be at least 1");
  if (planning_horizon_ticks < 0) throw ConfigError("planning_horizon_ticks: must be non-negative");
  swarm.validate();
  weights.validate();
  sensors.validate();
  if (kernel.width < 1 || kernel.width % 2 == 0) throw ConfigError("kernel.width: must be a positive odd number");
  if (kernel.hazard_weight < 0.0 || kernel.survivor_weight < 0.0 || kernel.infrastructure_weight < 0.0) {
    throw ConfigError("kernel: channel weights must be non-negative");
  }
  if (!(kernel.hazard_weight + kernel.survivor_weight + kernel.infrastructure_weight > 0.0)) {
    throw ConfigError("kernel: channel weights must not all be zero");
  }
  if (!(zone_threshold >= 0.0 && zone_threshold < 1.0)) throw ConfigError("zone_threshold: must lie in [0, 1)");
  if (max_zones < 1) throw ConfigError("max_zones: must be at least 1");
  if (quantization_block < 1) throw ConfigError("quantization_block: must be at least 1");
  if (snapshot_tick < -1) throw ConfigError("snapshot_tick: must be -1 or a tick index");
}

EpisodeResult run_episode(const ScenarioSpec& scenario, const EngineConfig& config, const TickObserver& observer) {
  config.validate();
  validate(scenario);
  return Episode(scenario, config, observer).run();
}

DecisionProblem initial_problem(const ScenarioSpec& scenario, const EngineConfig& config) {
  config.validate();
  validate(scenario);
  return Episode(scenario, config, {}).first_problem();
}

}  // namespace rescue
