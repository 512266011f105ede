#pragma once

#include "rescue/dynamics.hpp"
#include "rescue/optimizer.hpp"
#include "rescue/perception.hpp"
#include "rescue/scenario.hpp"

#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

namespace rescue {

enum class Policy { hybrid, perception_only, pso_only, simulated_annealing };

std::string_view to_string(Policy policy);
Policy parse_policy(std::string_view text);
inline constexpr Policy kAllPolicies[] = {Policy::hybrid, Policy::perception_only, Policy::pso_only,
                                          Policy::simulated_annealing};

struct EngineConfig {
  Policy policy = Policy::hybrid;
  int horizon_ticks = 160;  // 120 simulated minutes
  int replan_interval_ticks = 1;
  int planning_horizon_ticks = 0;  // rollout length cap; 0 plans over all remaining ticks
  bool commit_to_leg = true;       // a vehicle finishes its current leg to a known survivor before rerouting
  SwarmConfig swarm;
  ObjectiveWeights weights;
  SensorParams sensors;
  KernelParams kernel;
  double zone_threshold = 0.3;
  int max_zones = 32;
  int quantization_block = 8;  // pso_only survivor location resolution, in cells
  std::uint64_t seed = 0;
  int snapshot_tick = 0;  // planning cycle whose perception and convergence data are kept; -1 for none

  void validate() const;  // throws ConfigError
};

enum class EventType { tick, block, unblock, move, reach, deliver, reload, lost };

std::string_view to_string(EventType event);
EventType parse_event(std::string_view text);

struct LogRecord {
  int tick = 0;
  double time_min = 0.0;
  EventType event = EventType::tick;
  int vehicle = -1;
  Cell cell{-1, -1};
  int survivors = 0;
  int supplies = 0;
};

struct EpisodeLog {
  int total_survivors = 0;
  int supply_total = 0;
  int horizon_ticks = 0;
  double tick_seconds = kTickSeconds;
  std::vector<LogRecord> records;
  std::vector<double> latency_s;  // one wall-clock sample per planning cycle
};

struct MetricsRecord {
  double response_time_min = 0.0;
  double coverage_pct = 0.0;
  double decision_latency_s = 0.0;
  int ticks = 0;
  int survivors_reached = 0;
  int groups_reached = 0;
  int groups_lost = 0;
  int supplies_delivered = 0;
};

/// Throws ContractError for a log without any tick.
MetricsRecord compute_metrics(const EpisodeLog& log);

struct TrackPoint {
  int tick = 0;
  Cell cell;
};

struct VehicleTrack {
  VehicleClass cls = VehicleClass::ground;
  std::vector<TrackPoint> points;
};

struct EpisodeArtifacts {
  bool has_snapshot = false;
  int snapshot_tick = -1;
  PriorityMap priority;
  std::vector<Detection> detections;
  std::vector<Zone> zones;
  std::vector<double> convergence;  // empty for policies without an iterative optimizer
  std::vector<VehicleTrack> tracks;
};

struct EpisodeResult {
  MetricsRecord metrics;
  EpisodeLog log;
  EpisodeArtifacts artifacts;
};

/// State exposed once per tick, after the hazard has advanced.
struct TickView {
  int tick = 0;  // the tick that just executed
  const WorldState* world = nullptr;
  const PriorityMap* priority = nullptr;  // null when no map was built this tick
  int survivors_reached = 0;
  int supplies_delivered = 0;
  int supplies_on_vehicles = 0;
  int supplies_in_depots = 0;
};

using TickObserver = std::function<void(const TickView&)>;

/// One closed-loop episode: observe, prioritize, plan, move, advance the hazard.
EpisodeResult run_episode(const ScenarioSpec& scenario, const EngineConfig& config,
                          const TickObserver& observer = {});

/// The zone-level decision problem of the first planning cycle, as the hybrid,
/// greedy and annealing policies see it.
DecisionProblem initial_problem(const ScenarioSpec& scenario, const EngineConfig& config);

}  // namespace rescue
