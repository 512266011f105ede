#include "rescue/errors.hpp"
#include "rescue/optimizer.hpp"

#include <algorithm>

namespace rescue {

void ObjectiveWeights::validate() const {
  if (!(time >= 0.0 && coverage >= 0.0)) throw ConfigError("objective weights: must be non-negative");
  if (std::abs(time + coverage - 1.0) > 1e-9) throw ConfigError("objective weights: must sum to 1");
}

std::vector<int> assign_from_keys(const Eigen::Ref<const Eigen::VectorXd>& x, const DecisionProblem& problem) {
  const int v_count = problem.vehicle_count();
  const int k_count = problem.zone_count();
  if (x.size() != problem.dimension()) {
    throw ContractError("decode: key vector has dimension " + std::to_string(x.size()) + ", expected " +
                        std::to_string(problem.dimension()));
  }
  std::vector<int> assignment(v_count, kIdle);
  if (k_count == 0) return assignment;
  for (int v = 0; v < v_count; ++v) {
    const auto keys = x.segment(static_cast<Eigen::Index>(v) * k_count, k_count);
    Eigen::Index best = 0;
    const double top = keys.maxCoeff(&best);
    if (top < kIdleThreshold) continue;
    if (problem.travel.zone_reachable(v, best)) assignment[v] = static_cast<int>(best);
  }
  return assignment;
}

Eigen::VectorXd shares_from_keys(const Eigen::Ref<const Eigen::VectorXd>& x, const DecisionProblem& problem) {
  const int k_count = problem.zone_count();
  const Eigen::VectorXd keys = x.tail(k_count);
  const double total = keys.sum();
  if (total <= 0.0) return Eigen::VectorXd::Zero(k_count);
  return keys / total;
}

Plan build_plan(std::vector<int> assignment, Eigen::VectorXd shares, const DecisionProblem& problem) {
  const int v_count = problem.vehicle_count();
  const int k_count = problem.zone_count();
  const auto& tr = problem.travel;
  const double horizon = problem.horizon_seconds();

  Plan plan;
  plan.assignment = std::move(assignment);
  plan.supply_share = std::move(shares);
  plan.routes.assign(v_count, {});

  std::vector<std::vector<int>> members(k_count);
  for (int v = 0; v < v_count; ++v) {
    if (plan.assignment[v] != kIdle) members[plan.assignment[v]].push_back(v);
  }

  std::vector<double> clock;
  std::vector<int> at;
  std::vector<char> active;
  std::vector<int> open;
  for (int z = 0; z < k_count; ++z) {
    const auto& crew = members[z];
    if (crew.empty()) continue;
    const auto& zone = problem.zones[z];
    if (zone.targets.empty()) {
      for (int v : crew) {
        if (std::isfinite(tr.vehicle_anchor(v, z))) {
          plan.routes[v].push_back({kIdle, zone.anchor, tr.vehicle_anchor(v, z)});
        }
      }
      continue;
    }

    const std::size_t m = crew.size();
    clock.assign(m, 0.0);
    at.assign(m, kIdle);
    active.assign(m, 1);
    open = zone.targets;
    while (!open.empty()) {
      std::size_t pick = m;
      for (std::size_t i = 0; i < m; ++i) {
        if (active[i] && (pick == m || clock[i] < clock[pick])) pick = i;
      }
      if (pick == m) break;
      if (clock[pick] > horizon) {
        active[pick] = 0;
        continue;
      }
      const int v = crew[pick];
      const bool from_start = at[pick] == kIdle;
      const auto& between = problem.vehicles[v].cls == VehicleClass::ground ? tr.ground_between : tr.drone_between;
      const double scale = tr.time_scale(v);

      std::size_t best = open.size();
      double best_time = kInfinity;
      for (std::size_t j = 0; j < open.size(); ++j) {
        const int t = open[j];
        const double d = from_start ? tr.vehicle_target(v, t) : between(at[pick], t) * scale;
        if (d < best_time || (d == best_time && best < open.size() && t < open[best])) {
          best_time = d;
          best = j;
        }
      }
      if (best == open.size() || !std::isfinite(best_time)) {
        active[pick] = 0;
        continue;
      }
      const int t = open[best];
      clock[pick] += best_time;
      at[pick] = t;
      plan.routes[v].push_back({t, problem.targets[t].cell, clock[pick]});
      open[best] = open.back();
      open.pop_back();
    }
  }
  return plan;
}

Plan decode_particle(const Eigen::Ref<const Eigen::VectorXd>& x, const DecisionProblem& problem) {
  return build_plan(assign_from_keys(x, problem), shares_from_keys(x, problem), problem);
}

double fitness(const Plan& plan, const DecisionProblem& problem, const ObjectiveWeights& weights) {
  const int v_count = problem.vehicle_count();
  const int k_count = problem.zone_count();
  const auto& tr = problem.travel;
  if (static_cast<int>(plan.assignment.size()) != v_count || static_cast<int>(plan.routes.size()) != v_count) {
    throw ContractError("fitness: plan does not match the vehicle roster");
  }
  if (plan.supply_share.size() != k_count) throw ContractError("fitness: supply shares do not match the zones");
  for (int v = 0; v < v_count; ++v) {
    const int z = plan.assignment[v];
    if (z == kIdle) {
      if (!plan.routes[v].empty()) throw ContractError("fitness: idle vehicle has a route");
      continue;
    }
    if (z < 0 || z >= k_count) throw ContractError("fitness: assignment to unknown zone");
    if (!tr.zone_reachable(v, z)) {
      throw ContractError("fitness: vehicle " + std::to_string(v) + " assigned to unreachable zone " +
                          std::to_string(z));
    }
  }
  if (k_count > 0 && ((plan.supply_share.array() < 0.0).any() || (plan.supply_share.array() > 1.0).any() ||
                      plan.supply_share.sum() > 1.0 + 1e-9)) {
    throw ContractError("fitness: supply shares outside the simplex");
  }

  const double horizon = problem.horizon_seconds();
  Eigen::VectorXd reached = Eigen::VectorXd::Zero(k_count);
  Eigen::VectorXd total = Eigen::VectorXd::Zero(k_count);
  Eigen::VectorXd severity(k_count);
  for (int z = 0; z < k_count; ++z) {
    severity(z) = problem.zones[z].severity;
    for (int t : problem.zones[z].targets) total(z) += problem.targets[t].survivors;
  }

  double time_sum = 0.0;
  int reached_targets = 0;
  for (int v = 0; v < v_count; ++v) {
    for (const auto& stop : plan.routes[v]) {
      if (stop.target == kIdle || stop.arrival_s > horizon) continue;
      const int z = tr.target_zone[stop.target];
      if (z != plan.assignment[v]) throw ContractError("fitness: route leaves its assigned zone");
      reached(z) += problem.targets[stop.target].survivors;
      time_sum += stop.arrival_s;
      ++reached_targets;
    }
  }

  // Supply shares bound how many reached survivors count as served.
  const double servable = std::max(kSurvivorsPerSupplyUnit * problem.available_supply, total.sum());
  const Eigen::VectorXd covered = reached.cwiseMin(plan.supply_share * servable);
  const double denominator = severity.dot(total);
  const double coverage = denominator > 0.0 ? std::clamp(severity.dot(covered) / denominator, 0.0, 1.0) : 0.0;
  const double time_norm =
      reached_targets > 0 && horizon > 0.0 ? std::min(1.0, time_sum / reached_targets / horizon) : 1.0;
  return weights.time * time_norm + weights.coverage * (1.0 - coverage);
}

namespace {

// Per-thread buffers so repeated evaluation does not allocate.
struct Scratch {
  std::vector<int> assignment;
  std::vector<std::vector<int>> members;
  std::vector<std::vector<double>> arrivals;  // per vehicle, in route order
  std::vector<double> clock;
  std::vector<int> at;
  std::vector<char> active;
  std::vector<int> open;
  Eigen::VectorXd reached;
  Eigen::VectorXd covered;
};

}  // namespace

// Same result as fitness(decode_particle(x)), including summation order.
double evaluate(const Eigen::Ref<const Eigen::VectorXd>& x, const DecisionProblem& problem,
                const ObjectiveWeights& weights) {
  const int v_count = problem.vehicle_count();
  const int k_count = problem.zone_count();
  const auto& tr = problem.travel;
  if (x.size() != problem.dimension()) {
    throw ContractError("decode: key vector has dimension " + std::to_string(x.size()) + ", expected " +
                        std::to_string(problem.dimension()));
  }
  if (static_cast<int>(tr.zone_severity.size()) != k_count) {
    throw ContractError("evaluate: problem has not been prepared");
  }
  thread_local Scratch s;
  const double horizon = problem.horizon_seconds();

  s.assignment.assign(v_count, kIdle);
  for (int v = 0; v < v_count && k_count > 0; ++v) {
    const auto keys = x.segment(static_cast<Eigen::Index>(v) * k_count, k_count);
    Eigen::Index best = 0;
    const double top = keys.maxCoeff(&best);
    if (top < kIdleThreshold) continue;
    if (tr.zone_reachable(v, best)) s.assignment[v] = static_cast<int>(best);
  }

  s.members.resize(k_count);
  for (auto& m : s.members) m.clear();
  s.arrivals.resize(v_count);
  for (auto& a : s.arrivals) a.clear();
  for (int v = 0; v < v_count; ++v) {
    if (s.assignment[v] != kIdle) s.members[s.assignment[v]].push_back(v);
  }

  for (int z = 0; z < k_count; ++z) {
    const auto& crew = s.members[z];
    const auto& zone = problem.zones[z];
    if (crew.empty() || zone.targets.empty()) continue;
    const std::size_t m = crew.size();
    s.clock.assign(m, 0.0);
    s.at.assign(m, kIdle);
    s.active.assign(m, 1);
    s.open.assign(zone.targets.begin(), zone.targets.end());
    while (!s.open.empty()) {
      std::size_t pick = m;
      for (std::size_t i = 0; i < m; ++i) {
        if (s.active[i] && (pick == m || s.clock[i] < s.clock[pick])) pick = i;
      }
      if (pick == m) break;
      if (s.clock[pick] > horizon) {
        s.active[pick] = 0;
        continue;
      }
      const int v = crew[pick];
      const bool from_start = s.at[pick] == kIdle;
      const auto& between = problem.vehicles[v].cls == VehicleClass::ground ? tr.ground_between : tr.drone_between;
      const double scale = tr.time_scale(v);
      std::size_t best = s.open.size();
      double best_time = kInfinity;
      for (std::size_t j = 0; j < s.open.size(); ++j) {
        const int t = s.open[j];
        const double d = from_start ? tr.vehicle_target(v, t) : between(s.at[pick], t) * scale;
        if (d < best_time || (d == best_time && best < s.open.size() && t < s.open[best])) {
          best_time = d;
          best = j;
        }
      }
      if (best == s.open.size() || !std::isfinite(best_time)) {
        s.active[pick] = 0;
        continue;
      }
      const int t = s.open[best];
      s.clock[pick] += best_time;
      s.at[pick] = t;
      s.arrivals[v].push_back(s.clock[pick]);
      s.arrivals[v].push_back(static_cast<double>(t));
      s.open[best] = s.open.back();
      s.open.pop_back();
    }
  }

  s.reached.setZero(k_count);
  double time_sum = 0.0;
  int reached_targets = 0;
  for (int v = 0; v < v_count; ++v) {
    const auto& a = s.arrivals[v];
    for (std::size_t i = 0; i < a.size(); i += 2) {
      if (a[i] > horizon) continue;
      const int t = static_cast<int>(a[i + 1]);
      s.reached(tr.target_zone[t]) += problem.targets[t].survivors;
      time_sum += a[i];
      ++reached_targets;
    }
  }

  const auto shares = x.tail(k_count);
  const double key_total = shares.sum();
  const double servable = std::max(kSurvivorsPerSupplyUnit * problem.available_supply, tr.zone_survivors.sum());
  if (key_total <= 0.0) {
    s.covered.setZero(k_count);
  } else {
    s.covered = s.reached.cwiseMin((shares / key_total) * servable);
  }
  const double denominator = tr.zone_severity.dot(tr.zone_survivors);
  const double coverage =
      denominator > 0.0 ? std::clamp(tr.zone_severity.dot(s.covered) / denominator, 0.0, 1.0) : 0.0;
  const double time_norm =
      reached_targets > 0 && horizon > 0.0 ? std::min(1.0, time_sum / reached_targets / horizon) : 1.0;
  return weights.time * time_norm + weights.coverage * (1.0 - coverage);
}

}  // namespace rescue
