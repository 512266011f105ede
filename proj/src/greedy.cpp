#include "rescue/optimizer.hpp"

#include <numeric>

namespace rescue {

Plan greedy_plan(const DecisionProblem& problem) {
  const int v_count = problem.vehicle_count();
  const int k_count = problem.zone_count();
  const auto& tr = problem.travel;

  std::vector<int> order(k_count);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return problem.zones[a].severity > problem.zones[b].severity;
  });

  std::vector<int> assignment(v_count, kIdle);
  std::vector<char> taken(v_count, 0);
  for (int z : order) {
    const auto& zone = problem.zones[z];
    int chosen = kIdle;
    double nearest = kInfinity;
    for (int v = 0; v < v_count; ++v) {
      if (taken[v] || !tr.zone_reachable(v, z)) continue;
      double d = zone.targets.empty() ? tr.vehicle_anchor(v, z) : kInfinity;
      for (int t : zone.targets) d = std::min(d, tr.vehicle_target(v, t));
      if (d < nearest) {
        nearest = d;
        chosen = v;
      }
    }
    if (chosen != kIdle) {
      assignment[chosen] = z;
      taken[chosen] = 1;
    }
  }

  Eigen::VectorXd shares = Eigen::VectorXd::Zero(k_count);
  double total = 0.0;
  for (int z = 0; z < k_count; ++z) total += problem.zones[z].severity;
  if (total > 0.0) {
    for (int z = 0; z < k_count; ++z) shares(z) = problem.zones[z].severity / total;
  }
  return build_plan(std::move(assignment), std::move(shares), problem);
}

}  // namespace rescue
