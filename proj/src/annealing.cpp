#include "rescue/errors.hpp"
#include "rescue/optimizer.hpp"

#include <cmath>
#include <numeric>

namespace rescue {

AnnealConfig AnnealConfig::matched(const SwarmConfig& swarm) {
  AnnealConfig config;
  config.budget = std::max<long>(1, static_cast<long>(swarm.particle_count) * swarm.iterations);
  return config;
}

void AnnealConfig::validate() const {
  if (budget < 1) throw ConfigError("anneal budget: must be at least 1");
  if (!(initial_temperature > 0.0)) throw ConfigError("initial_temperature: must be positive");
  if (!(final_temperature > 0.0 && final_temperature <= initial_temperature)) {
    throw ConfigError("final_temperature: must lie in (0, initial_temperature]");
  }
  if (!(step_sigma >= 0.0)) throw ConfigError("step_sigma: must be non-negative");
  if (!(perturb_fraction > 0.0 && perturb_fraction <= 1.0)) throw ConfigError("perturb_fraction: must lie in (0, 1]");
}

OptimizeResult anneal_minimize(int dimension, const Objective& objective, const AnnealConfig& config, Rng& rng) {
  config.validate();
  std::normal_distribution<double> step(0.0, config.step_sigma);

  Eigen::VectorXd current = Eigen::VectorXd::NullaryExpr(dimension, [&] { return uniform01(rng); });
  double current_score = objective(current);
  OptimizeResult result;
  result.evaluations = 1;
  result.best_position = current;
  result.best_score = current_score;
  result.trace.reserve(config.budget);
  result.trace.push_back(current_score);

  const double cooling =
      config.budget > 1 ? std::pow(config.final_temperature / config.initial_temperature, 1.0 / (config.budget - 1))
                        : 1.0;
  double temperature = config.initial_temperature;
  const int moved = dimension > 0 ? std::max(1, static_cast<int>(std::lround(config.perturb_fraction * dimension))) : 0;
  std::vector<int> order(dimension);
  std::iota(order.begin(), order.end(), 0);
  Eigen::VectorXd candidate = current;

  for (long s = 1; s < config.budget; ++s) {
    candidate = current;
    // partial Fisher-Yates picks `moved` distinct dimensions
    for (int i = 0; i < moved; ++i) {
      std::uniform_int_distribution<int> pick(i, dimension - 1);
      std::swap(order[i], order[pick(rng)]);
      const int d = order[i];
      candidate(d) = std::clamp(candidate(d) + step(rng), 0.0, 1.0);
    }
    const double score = objective(candidate);
    ++result.evaluations;
    const double delta = score - current_score;
    if (delta < 0.0 || uniform01(rng) < std::exp(-delta / temperature)) {
      current.swap(candidate);
      current_score = score;
    }
    // best <= current score, so an improvement on the best was always accepted
    if (score < result.best_score) {
      result.best_score = score;
      result.best_position = current;
    }
    result.trace.push_back(result.best_score);
    temperature *= cooling;
  }
  return result;
}

OptimizeResult sa_optimize(const DecisionProblem& problem, const AnnealConfig& config, Rng& rng,
                           const ObjectiveWeights& weights) {
  weights.validate();
  const Objective objective = [&](const Eigen::Ref<const Eigen::VectorXd>& x) {
    return evaluate(x, problem, weights);
  };
  OptimizeResult result = anneal_minimize(problem.dimension(), objective, config, rng);
  result.plan = decode_particle(result.best_position, problem);
  return result;
}

}  // namespace rescue
