#include "rescue/errors.hpp"
#include "rescue/optimizer.hpp"

namespace rescue {

void SwarmConfig::validate() const {
  if (particle_count < 1) throw ConfigError("particle_count: must be at least 1");
  if (iterations < 0) throw ConfigError("iterations: must be non-negative");
  if (!(inertia >= 0.0)) throw ConfigError("inertia: must be non-negative");
  if (!(cognitive >= 0.0)) throw ConfigError("cognitive: must be non-negative");
  if (!(social >= 0.0)) throw ConfigError("social: must be non-negative");
  if (!(velocity_clamp > 0.0)) throw ConfigError("velocity_clamp: must be positive");
}

namespace {

template <typename Draw>
void update_swarm(std::vector<Particle>& swarm, const Eigen::VectorXd& gbest, const SwarmConfig& config, Draw&& draw) {
  const double vmax = config.velocity_clamp;
  for (auto& p : swarm) {
    if (p.position.size() != gbest.size() || p.velocity.size() != gbest.size() ||
        p.best_position.size() != gbest.size()) {
      throw ContractError("pso_step: particle dimension does not match gbest");
    }
    for (Eigen::Index d = 0; d < gbest.size(); ++d) {
      const double r1 = draw();
      const double r2 = draw();
      const double v = config.inertia * p.velocity(d) +
                       config.cognitive * r1 * (p.best_position(d) - p.position(d)) +
                       config.social * r2 * (gbest(d) - p.position(d));
      p.velocity(d) = std::clamp(v, -vmax, vmax);
      p.position(d) = std::clamp(p.position(d) + p.velocity(d), 0.0, 1.0);
    }
  }
}

}  // namespace

void pso_step(std::vector<Particle>& swarm, const Eigen::VectorXd& gbest, const SwarmConfig& config,
              const std::function<double()>& draw) {
  update_swarm(swarm, gbest, config, draw);
}

void pso_step(std::vector<Particle>& swarm, const Eigen::VectorXd& gbest, const SwarmConfig& config, Rng& rng) {
  // Same draw order as the scalar update (r1, r2 per dimension), evaluated as array expressions.
  const Eigen::Index dim = gbest.size();
  Eigen::ArrayXd r1(dim), r2(dim);
  const double vmax = config.velocity_clamp;
  for (auto& p : swarm) {
    if (p.position.size() != dim || p.velocity.size() != dim || p.best_position.size() != dim) {
      throw ContractError("pso_step: particle dimension does not match gbest");
    }
    for (Eigen::Index d = 0; d < dim; ++d) {
      r1(d) = uniform01(rng);
      r2(d) = uniform01(rng);
    }
    auto x = p.position.array();
    auto v = p.velocity.array();
    v = (config.inertia * v + config.cognitive * r1 * (p.best_position.array() - x) +
         config.social * r2 * (gbest.array() - x))
            .max(-vmax)
            .min(vmax);
    x = (x + v).max(0.0).min(1.0);
  }
}

namespace {

// Scores are written by index, so the result does not depend on scheduling.
void evaluate_swarm(const std::vector<Particle>& swarm, const Objective& objective, std::vector<double>& scores,
                    bool parallel) {
  const int count = static_cast<int>(swarm.size());
#pragma omp parallel for schedule(static) if (parallel)
  for (int i = 0; i < count; ++i) scores[i] = objective(swarm[i].position);
}

}  // namespace

OptimizeResult pso_minimize(int dimension, const Objective& objective, const SwarmConfig& config, Rng& rng) {
  config.validate();
  std::vector<Particle> swarm(config.particle_count);
  for (auto& p : swarm) {
    p.position = Eigen::VectorXd::NullaryExpr(dimension, [&] { return uniform01(rng); });
    p.velocity = Eigen::VectorXd::Zero(dimension);
  }

  std::vector<double> scores(swarm.size());
  OptimizeResult result;
  evaluate_swarm(swarm, objective, scores, config.parallel);
  result.evaluations += static_cast<long>(swarm.size());
  std::size_t leader = 0;
  for (std::size_t i = 0; i < swarm.size(); ++i) {
    swarm[i].best_position = swarm[i].position;
    swarm[i].best_score = scores[i];
    if (scores[i] < scores[leader]) leader = i;
  }
  Eigen::VectorXd gbest = swarm[leader].position;
  double gbest_score = scores[leader];
  result.trace.reserve(config.iterations + 1);
  result.trace.push_back(gbest_score);

  for (int it = 0; it < config.iterations; ++it) {
    pso_step(swarm, gbest, config, rng);
    evaluate_swarm(swarm, objective, scores, config.parallel);
    result.evaluations += static_cast<long>(swarm.size());
    for (std::size_t i = 0; i < swarm.size(); ++i) {
      auto& p = swarm[i];
      if (scores[i] < p.best_score) {
        p.best_score = scores[i];
        p.best_position = p.position;
      }
      if (p.best_score < gbest_score) {
        gbest_score = p.best_score;
        gbest = p.best_position;
      }
    }
    result.trace.push_back(gbest_score);
  }
  result.best_position = std::move(gbest);
  result.best_score = gbest_score;
  return result;
}

OptimizeResult pso_optimize(const DecisionProblem& problem, const SwarmConfig& config, Rng& rng,
                            const ObjectiveWeights& weights) {
  weights.validate();
  const Objective objective = [&](const Eigen::Ref<const Eigen::VectorXd>& x) {
    return evaluate(x, problem, weights);
  };
  OptimizeResult result = pso_minimize(problem.dimension(), objective, config, rng);
  result.plan = decode_particle(result.best_position, problem);
  return result;
}

}  // namespace rescue
