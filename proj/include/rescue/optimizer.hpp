#pragma once

#include "rescue/grid.hpp"
#include "rescue/rng.hpp"
#include "rescue/router.hpp"
#include "rescue/scenario.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <vector>

namespace rescue {

inline constexpr int kIdle = -1;
inline constexpr double kIdleThreshold = 0.05;
inline constexpr int kSurvivorsPerSupplyUnit = 5;

struct SwarmConfig {
  int particle_count = 120;
  int iterations = 100;
  double inertia = 0.7;
  double cognitive = 2.0;
  double social = 2.0;
  double velocity_clamp = 0.25;
  std::uint64_t seed = 0;
  bool parallel = true;  // evaluate particle fitness concurrently

  void validate() const;  // throws ConfigError
};

struct ObjectiveWeights {
  double time = 0.5;
  double coverage = 0.5;

  void validate() const;  // throws ConfigError
};

struct Particle {
  Eigen::VectorXd position;
  Eigen::VectorXd velocity;
  Eigen::VectorXd best_position;
  double best_score = kInfinity;
};

/// A rescue target as the planner sees it.
struct PlanTarget {
  Cell cell;
  int survivors = 0;
};

struct PlanZone {
  double severity = 0.0;
  Cell anchor;               // staging cell used when the zone has no targets
  std::vector<int> targets;  // indices into DecisionProblem::targets
};

struct FleetMember {
  VehicleClass cls = VehicleClass::ground;
  Cell position;
  double speed_kmh = kGroundRoadSpeedKmh;
  int load = 0;
};

/// Travel times derived from the frozen cost maps; filled by prepare().
struct TravelTables {
  Eigen::MatrixXd vehicle_target;  // V x T seconds
  Eigen::MatrixXd vehicle_anchor;  // V x K seconds
  Eigen::MatrixXd ground_between;  // T x T seconds at reference ground speed
  Eigen::MatrixXd drone_between;   // T x T seconds at reference drone speed
  Eigen::VectorXd time_scale;      // V: reference speed / own speed
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> zone_reachable;  // V x K
  std::vector<int> target_zone;
  Eigen::VectorXd zone_severity;   // K
  Eigen::VectorXd zone_survivors;  // K, sum of target survivor estimates
};

struct DecisionProblem {
  std::vector<PlanZone> zones;
  std::vector<PlanTarget> targets;
  std::vector<FleetMember> vehicles;
  CostMap ground_costs;  // at kGroundRoadSpeedKmh
  CostMap drone_costs;   // at kDroneSpeedKmh
  std::vector<Depot> depots;
  int horizon_ticks = 1;
  double tick_seconds = 45.0;
  double available_supply = 0.0;
  TravelTables travel;

  int vehicle_count() const { return static_cast<int>(vehicles.size()); }
  int zone_count() const { return static_cast<int>(zones.size()); }
  int dimension() const { return vehicle_count() * zone_count() + zone_count(); }
  double horizon_seconds() const { return horizon_ticks * tick_seconds; }

  /// Computes travel tables. `ground_fields` may be shared with other users of the same cost map.
  void prepare(FieldCache& ground_fields);
  void prepare();
};

struct RouteStop {
  int target = kIdle;  // kIdle for a zone anchor
  Cell cell;
  double arrival_s = 0.0;
};

struct Plan {
  std::vector<int> assignment;   // per vehicle: zone index or kIdle
  Eigen::VectorXd supply_share;  // per zone, sums to <= 1
  std::vector<std::vector<RouteStop>> routes;
};

/// Zone choice per vehicle from the first V*K keys; unreachable choices are repaired to idle.
std::vector<int> assign_from_keys(const Eigen::Ref<const Eigen::VectorXd>& x, const DecisionProblem& problem);

/// Supply shares from the last K keys.
Eigen::VectorXd shares_from_keys(const Eigen::Ref<const Eigen::VectorXd>& x, const DecisionProblem& problem);

/// Routes for a fixed assignment: within each zone the assigned vehicles share a
/// nearest-neighbor sweep, the vehicle with the earliest clock choosing next.
/// A vehicle stops taking targets once its clock passes the horizon.
Plan build_plan(std::vector<int> assignment, Eigen::VectorXd shares, const DecisionProblem& problem);

Plan decode_particle(const Eigen::Ref<const Eigen::VectorXd>& x, const DecisionProblem& problem);

/// Lower is better; in [0, 1] when weights sum to 1. Throws ContractError for infeasible plans.
double fitness(const Plan& plan, const DecisionProblem& problem, const ObjectiveWeights& weights);

/// decode + fitness
double evaluate(const Eigen::Ref<const Eigen::VectorXd>& x, const DecisionProblem& problem,
                const ObjectiveWeights& weights);

/// One velocity/position update of every particle. `draw` supplies the r1, r2 coefficients.
void pso_step(std::vector<Particle>& swarm, const Eigen::VectorXd& gbest, const SwarmConfig& config,
              const std::function<double()>& draw);
void pso_step(std::vector<Particle>& swarm, const Eigen::VectorXd& gbest, const SwarmConfig& config, Rng& rng);

struct OptimizeResult {
  Plan plan;
  Eigen::VectorXd best_position;
  double best_score = kInfinity;
  std::vector<double> trace;  // running best score
  long evaluations = 0;
};

using Objective = std::function<double(const Eigen::Ref<const Eigen::VectorXd>&)>;

/// Canonical global-best PSO on [0,1]^dimension. trace has iterations + 1 entries.
OptimizeResult pso_minimize(int dimension, const Objective& objective, const SwarmConfig& config, Rng& rng);

OptimizeResult pso_optimize(const DecisionProblem& problem, const SwarmConfig& config, Rng& rng,
                            const ObjectiveWeights& weights = {});

struct AnnealConfig {
  long budget = 12000;
  double initial_temperature = 1.0;
  double final_temperature = 1e-3;
  double step_sigma = 0.1;
  double perturb_fraction = 0.1;

  /// Same number of evaluations as the swarm's particles x iterations.
  static AnnealConfig matched(const SwarmConfig& swarm);
  void validate() const;
};

/// Single-chain annealing; trace has one entry per evaluation.
OptimizeResult anneal_minimize(int dimension, const Objective& objective, const AnnealConfig& config, Rng& rng);

OptimizeResult sa_optimize(const DecisionProblem& problem, const AnnealConfig& config, Rng& rng,
                           const ObjectiveWeights& weights = {});

/// Severity-ordered nearest-vehicle dispatch, one vehicle per zone.
Plan greedy_plan(const DecisionProblem& problem);

}  // namespace rescue
