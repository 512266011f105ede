#include "support.hpp"

#include "rescue/errors.hpp"
#include "rescue/optimizer.hpp"

#include <doctest.h>

#include <set>

using namespace rescue;

namespace {

Particle particle(std::vector<double> x, std::vector<double> v, std::vector<double> pbest) {
  Particle p;
  p.position = Eigen::Map<Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
  p.velocity = Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  p.best_position = Eigen::Map<Eigen::VectorXd>(pbest.data(), static_cast<Eigen::Index>(pbest.size()));
  return p;
}

Eigen::VectorXd vec(std::initializer_list<double> values) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double v : values) out(i++) = v;
  return out;
}

Eigen::VectorXd random_keys(int dim, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::VectorXd x(dim);
  for (int d = 0; d < dim; ++d) x(d) = u(rng);
  return x;
}

// Independent decoder: assignment, shares and the shared nearest-neighbour sweep, written from the rule text.
Plan reference_decode(const Eigen::VectorXd& x, const DecisionProblem& p) {
  const int V = p.vehicle_count(), K = p.zone_count();
  Plan plan;
  plan.assignment.assign(V, kIdle);
  for (int v = 0; v < V && K > 0; ++v) {
    int arg = 0;
    for (int z = 1; z < K; ++z) {
      if (x(v * K + z) > x(v * K + arg)) arg = z;
    }
    if (x(v * K + arg) >= kIdleThreshold && p.travel.zone_reachable(v, arg)) plan.assignment[v] = arg;
  }
  const double total = x.tail(K).sum();
  plan.supply_share = total > 0.0 ? Eigen::VectorXd(x.tail(K) / total) : Eigen::VectorXd::Zero(K);
  plan.routes.assign(V, {});

  for (int z = 0; z < K; ++z) {
    std::vector<int> crew;
    for (int v = 0; v < V; ++v) {
      if (plan.assignment[v] == z) crew.push_back(v);
    }
    if (crew.empty()) continue;
    if (p.zones[z].targets.empty()) {
      for (int v : crew) plan.routes[v].push_back({kIdle, p.zones[z].anchor, p.travel.vehicle_anchor(v, z)});
      continue;
    }
    std::set<int> open(p.zones[z].targets.begin(), p.zones[z].targets.end());
    std::vector<double> clock(crew.size(), 0.0);
    std::vector<int> last(crew.size(), -1);
    std::vector<bool> done(crew.size(), false);
    while (!open.empty()) {
      int who = -1;
      for (int i = 0; i < static_cast<int>(crew.size()); ++i) {
        if (!done[i] && (who < 0 || clock[i] < clock[who])) who = i;
      }
      if (who < 0) break;
      if (clock[who] > p.horizon_seconds()) {
        done[who] = true;
        continue;
      }
      const int v = crew[who];
      const bool drone = p.vehicles[v].cls == VehicleClass::drone;
      int best = -1;
      double best_time = kInfinity;
      for (int t : open) {  // ascending, so ties keep the lowest index
        const double d = last[who] < 0 ? p.travel.vehicle_target(v, t)
                                       : (drone ? p.travel.drone_between(last[who], t)
                                                : p.travel.ground_between(last[who], t)) *
                                             p.travel.time_scale(v);
        if (d < best_time) {
          best_time = d;
          best = t;
        }
      }
      if (best < 0) {
        done[who] = true;
        continue;
      }
      clock[who] += best_time;
      last[who] = best;
      plan.routes[v].push_back({best, p.targets[best].cell, clock[who]});
      open.erase(best);
    }
  }
  return plan;
}

// One zone per target, each target on the vehicle's own cell or at a known distance.
DecisionProblem line_problem(int zones, int vehicles) {
  DecisionProblem p;
  p.ground_costs = uniform_cost_map(20, 9.0);
  p.drone_costs = uniform_cost_map(20, 4.5);
  for (int v = 0; v < vehicles; ++v) p.vehicles.push_back({VehicleClass::ground, {0, v}, kGroundRoadSpeedKmh, 30});
  for (int z = 0; z < zones; ++z) {
    PlanZone zone;
    zone.severity = 1.0;
    zone.anchor = {10, 2 * z};
    zone.targets = {z};
    p.zones.push_back(zone);
    p.targets.push_back({{10, 2 * z}, 10});
  }
  p.horizon_ticks = 20;
  p.available_supply = 100;
  p.prepare();
  return p;
}

}  // namespace

TEST_SUITE("optimizer") {

TEST_CASE("pso_step: no forces leaves positions unchanged") {
  SwarmConfig c;
  c.inertia = 1.0;
  c.cognitive = 0.0;
  c.social = 0.0;
  std::vector<Particle> swarm{particle({0.2, 0.9, 0.4}, {0, 0, 0}, {1, 1, 1})};
  pso_step(swarm, vec({0, 0, 0}), c, [] { return 0.7; });
  CHECK(swarm[0].position == vec({0.2, 0.9, 0.4}));
}

TEST_CASE("pso_step: at pbest and gbest only inertia remains") {
  SwarmConfig c;
  std::vector<Particle> swarm{particle({0.3, 0.6}, {0.1, -0.2}, {0.3, 0.6})};
  pso_step(swarm, vec({0.3, 0.6}), c, [] { return 0.9; });
  CHECK(swarm[0].velocity(0) == doctest::Approx(0.07));
  CHECK(swarm[0].velocity(1) == doctest::Approx(-0.14));
}

TEST_CASE("pso_step: hand-computed update") {
  // v1 = 0.7*0 + 2*0.5*(1-0.5) + 2*0.5*(0-0.5) = 0, v2 = 2*0.5*(0-0.5) + 2*0.5*(1-0.5) = 0
  SwarmConfig c;
  c.inertia = 0.7;
  std::vector<Particle> swarm{particle({0.5, 0.5}, {0, 0}, {1, 0})};
  pso_step(swarm, vec({0, 1}), c, [] { return 0.5; });
  CHECK(swarm[0].velocity == vec({0, 0}));
  CHECK(swarm[0].position == vec({0.5, 0.5}));

  // a lopsided pull is clamped to the velocity limit
  std::vector<Particle> pulled{particle({0.5}, {0}, {1})};
  pso_step(pulled, vec({1}), c, [] { return 0.5; });
  CHECK(pulled[0].velocity(0) == doctest::Approx(0.25));
  CHECK(pulled[0].position(0) == doctest::Approx(0.75));
}

TEST_CASE("pso_step keeps positions in the box and velocities clamped") {
  SwarmConfig c;
  Rng rng = make_rng(5, Stream::optimizer);
  std::mt19937_64 init(5);
  std::vector<Particle> swarm;
  for (int i = 0; i < 30; ++i) {
    Particle p;
    p.position = random_keys(9, init);
    p.velocity = Eigen::VectorXd::Zero(9);
    p.best_position = random_keys(9, init);
    swarm.push_back(p);
  }
  const Eigen::VectorXd gbest = random_keys(9, init);
  for (int it = 0; it < 50; ++it) {
    pso_step(swarm, gbest, c, rng);
    for (const auto& p : swarm) {
      CHECK(p.position.minCoeff() >= 0.0);
      CHECK(p.position.maxCoeff() <= 1.0);
      CHECK(p.velocity.cwiseAbs().maxCoeff() <= c.velocity_clamp);
    }
  }
}

TEST_CASE("vectorized and scalar updates agree") {
  SwarmConfig c;
  std::mt19937_64 init(8);
  std::vector<Particle> a;
  for (int i = 0; i < 5; ++i) a.push_back(particle({0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}));
  for (auto& p : a) {
    p.position = random_keys(4, init);
    p.best_position = random_keys(4, init);
  }
  auto b = a;
  const Eigen::VectorXd g = random_keys(4, init);
  Rng ra = make_rng(1, Stream::optimizer), rb = make_rng(1, Stream::optimizer);
  pso_step(a, g, c, ra);
  pso_step(b, g, c, [&] { return uniform01(rb); });
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK((a[i].position - b[i].position).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((a[i].velocity - b[i].velocity).cwiseAbs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("pso_step rejects mismatched dimensions") {
  std::vector<Particle> swarm{particle({0.5, 0.5}, {0, 0}, {0.5, 0.5})};
  Rng rng = make_rng(1, Stream::optimizer);
  CHECK_THROWS_AS(pso_step(swarm, vec({0.1, 0.2, 0.3}), SwarmConfig{}, rng), ContractError);
}

TEST_CASE("decode with no zones idles every vehicle") {
  auto p = line_problem(0, 3);
  const auto plan = decode_particle(Eigen::VectorXd(0), p);
  CHECK(plan.assignment == std::vector<int>{kIdle, kIdle, kIdle});
  CHECK(plan.supply_share.size() == 0);
  CHECK(fitness(plan, p, {}) == 1.0);
}

TEST_CASE("decode takes the argmax and respects the idle threshold") {
  auto p = line_problem(2, 1);
  CHECK(decode_particle(vec({0.9, 0.1, 0.5, 0.5}), p).assignment == std::vector<int>{0});
  CHECK(decode_particle(vec({0.2, 0.6, 0.5, 0.5}), p).assignment == std::vector<int>{1});
  CHECK(decode_particle(vec({0.04, 0.01, 0.5, 0.5}), p).assignment == std::vector<int>{kIdle});
  CHECK(decode_particle(vec({0.9, 0.1, 0.3, 0.1}), p).supply_share.isApprox(vec({0.75, 0.25})));
  CHECK_THROWS_AS(decode_particle(vec({0.9, 0.1}), p), ContractError);
}

TEST_CASE("decode agrees with an independent decoder") {
  std::mt19937_64 rng(31);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto p = testing::toy_problem(seed);
    for (int trial = 0; trial < 40; ++trial) {
      const Eigen::VectorXd x = random_keys(p.dimension(), rng);
      const Plan a = decode_particle(x, p);
      const Plan b = reference_decode(x, p);
      REQUIRE(a.assignment == b.assignment);
      CHECK(a.supply_share.isApprox(b.supply_share));
      REQUIRE(a.routes.size() == b.routes.size());
      for (std::size_t v = 0; v < a.routes.size(); ++v) {
        REQUIRE(a.routes[v].size() == b.routes[v].size());
        for (std::size_t k = 0; k < a.routes[v].size(); ++k) {
          CHECK(a.routes[v][k].target == b.routes[v][k].target);
          CHECK(a.routes[v][k].arrival_s == b.routes[v][k].arrival_s);
        }
      }
    }
  }
}

TEST_CASE("decode never assigns an unreachable zone") {
  auto p = line_problem(2, 2);
  p.ground_costs.seconds.row(5).setConstant(kInfinity);  // cuts zones off from both vehicles
  p.zones[1].targets.clear();
  p.zones[1].anchor = {1, 5};
  p.prepare();
  CHECK_FALSE(p.travel.zone_reachable(0, 0));
  CHECK(p.travel.zone_reachable(0, 1));
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const auto plan = decode_particle(random_keys(p.dimension(), rng), p);
    for (int v = 0; v < 2; ++v) CHECK(plan.assignment[v] != 0);
    CHECK_NOTHROW(fitness(plan, p, {}));
  }
}

TEST_CASE("argmax is invariant to scaling one vehicle's keys") {
  const auto p = testing::toy_problem(4);
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd x = random_keys(p.dimension(), rng);
    x(0) = std::max(x(0), kIdleThreshold);
    const auto before = decode_particle(x, p).assignment;
    x.head(p.zone_count()) *= 1.0 + 3.0 * (trial % 7);
    CHECK(decode_particle(x, p).assignment == before);
  }
}

TEST_CASE("fitness conventions") {
  auto p = line_problem(2, 2);
  const double horizon = p.horizon_seconds();

  SUBCASE("all idle scores 1") {
    const Plan idle = build_plan({kIdle, kIdle}, vec({0.5, 0.5}), p);
    CHECK(fitness(idle, p, {}) == 1.0);
  }
  SUBCASE("half covered at half the horizon scores 0.5") {
    Plan plan;
    plan.assignment = {0, kIdle};
    plan.supply_share = vec({0.5, 0.5});
    plan.routes = {{{0, p.targets[0].cell, horizon / 2}}, {}};
    CHECK(fitness(plan, p, {}) == doctest::Approx(0.5));
  }
  SUBCASE("everything reached immediately scores about 0") {
    Plan plan;
    plan.assignment = {0, 1};
    plan.supply_share = vec({0.5, 0.5});
    plan.routes = {{{0, p.targets[0].cell, 1e-6}}, {{1, p.targets[1].cell, 1e-6}}};
    CHECK(fitness(plan, p, {}) == doctest::Approx(0.0).epsilon(1e-6));
  }
  SUBCASE("arrivals past the horizon do not count") {
    Plan plan;
    plan.assignment = {0, kIdle};
    plan.supply_share = vec({1.0, 0.0});
    plan.routes = {{{0, p.targets[0].cell, horizon + 1}}, {}};
    CHECK(fitness(plan, p, {}) == 1.0);
  }
  SUBCASE("infeasible plans are contract errors") {
    Plan plan = build_plan({0, kIdle}, vec({0.5, 0.5}), p);
    plan.supply_share = vec({0.9, 0.9});
    CHECK_THROWS_AS(fitness(plan, p, {}), ContractError);
    plan = build_plan({0, kIdle}, vec({0.5, 0.5}), p);
    plan.assignment[0] = 1;
    CHECK_THROWS_AS(fitness(plan, p, {}), ContractError);
  }
}

TEST_CASE("objective weights must sum to one") {
  CHECK_THROWS_AS((ObjectiveWeights{0.7, 0.7}.validate()), ConfigError);
  CHECK_NOTHROW((ObjectiveWeights{0.2, 0.8}.validate()));
}

TEST_CASE("fused evaluation equals fitness of the decoded plan") {
  std::mt19937_64 rng(12);
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto p = testing::toy_problem(seed);
    for (int trial = 0; trial < 50; ++trial) {
      const Eigen::VectorXd x = random_keys(p.dimension(), rng);
      const double f = fitness(decode_particle(x, p), p, {});
      CHECK(evaluate(x, p, {}) == f);
      CHECK(f >= 0.0);
      CHECK(f <= 1.0);
    }
  }
}

TEST_CASE("degenerate swarm returns its initial sample") {
  const auto p = testing::toy_problem(1);
  SwarmConfig c;
  c.particle_count = 1;
  c.iterations = 0;
  Rng rng = make_rng(3, Stream::optimizer);
  const auto r = pso_optimize(p, c, rng);
  REQUIRE(r.trace.size() == 1);
  CHECK(r.evaluations == 1);
  Rng again = make_rng(3, Stream::optimizer);
  Eigen::VectorXd x(p.dimension());
  for (int d = 0; d < p.dimension(); ++d) x(d) = uniform01(again);
  CHECK(r.best_position == x);
  CHECK(r.best_score == evaluate(x, p, {}));
}

TEST_CASE("pso traces are monotone, full length and reproducible") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto p = testing::toy_problem(seed);
    SwarmConfig c;
    c.particle_count = 40;
    c.iterations = 60;
    Rng a = make_rng(seed, Stream::optimizer), b = make_rng(seed, Stream::optimizer);
    const auto r = pso_optimize(p, c, a);
    c.parallel = false;
    const auto s = pso_optimize(p, c, b);
    REQUIRE(r.trace.size() == 61);
    for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i] <= r.trace[i - 1]);
    CHECK(r.trace == s.trace);
    CHECK(r.best_score == r.trace.back());
    CHECK(fitness(r.plan, p, {}) == r.best_score);
  }
}

TEST_CASE("swarm configuration is validated") {
  SwarmConfig c;
  c.particle_count = 0;
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("particle_count"), ConfigError);
  c = {};
  c.inertia = -0.1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("pso comes within 1% of the exhaustive optimum on small instances") {
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto p = testing::toy_problem(1000 + seed);
    const auto best = testing::exhaustive_optimum(p, {});
    Rng rng = make_rng(seed, Stream::optimizer);
    const auto r = pso_optimize(p, SwarmConfig{}, rng);
    hits += r.best_score <= best.best * 1.01 + 1e-12;
  }
  CHECK(hits >= 19);
}

TEST_CASE("annealing with a budget of one returns its initial sample") {
  AnnealConfig c;
  c.budget = 1;
  Rng rng = make_rng(2, Stream::optimizer);
  const auto r = anneal_minimize(3, [](const auto& x) { return x.sum(); }, c, rng);
  CHECK(r.trace.size() == 1);
  CHECK(r.evaluations == 1);
  Rng again = make_rng(2, Stream::optimizer);
  Eigen::VectorXd x(3);
  for (int d = 0; d < 3; ++d) x(d) = uniform01(again);
  CHECK(r.best_position == x);
}

TEST_CASE("annealing always accepts improvements") {
  // every new evaluation scores lower than the last, so every proposal is taken
  int calls = 0;
  AnnealConfig c;
  c.budget = 500;
  Rng rng = make_rng(6, Stream::optimizer);
  const auto r = anneal_minimize(10, [&](const auto&) { return -static_cast<double>(++calls); }, c, rng);
  CHECK(r.best_score == -500.0);
  for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i] < r.trace[i - 1]);
}

TEST_CASE("annealing budget matches the swarm") {
  CHECK(AnnealConfig::matched(SwarmConfig{}).budget == 12000);
  AnnealConfig c;
  c.final_temperature = 2.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("annealing does no better than the swarm on average") {
  double sa = 0.0, pso = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto p = testing::toy_problem(1000 + seed);
    Rng a = make_rng(seed, Stream::optimizer), b = make_rng(seed, Stream::optimizer);
    const auto s = sa_optimize(p, AnnealConfig::matched(SwarmConfig{}), a);
    for (std::size_t i = 1; i < s.trace.size(); ++i) REQUIRE(s.trace[i] <= s.trace[i - 1]);
    CHECK(s.trace.size() == 12000);
    sa += s.best_score;
    pso += pso_optimize(p, SwarmConfig{}, b).best_score;
  }
  CHECK(sa >= pso);
}

TEST_CASE("greedy dispatch") {
  SUBCASE("one vehicle, one zone") {
    const auto p = line_problem(1, 1);
    CHECK(greedy_plan(p).assignment == std::vector<int>{0});
  }
  SUBCASE("equidistant vehicles: the lower index wins") {
    DecisionProblem p = line_problem(1, 0);
    p.vehicles = {{VehicleClass::ground, {10, 4}, kGroundRoadSpeedKmh, 30},
                  {VehicleClass::ground, {10, 6}, kGroundRoadSpeedKmh, 30}};
    p.targets[0].cell = {10, 5};
    p.zones[0].anchor = {10, 5};
    p.prepare();
    CHECK(greedy_plan(p).assignment == std::vector<int>{0, kIdle});
  }
  SUBCASE("severe zones are served first") {
    auto p = line_problem(2, 1);
    p.zones[1].severity = 5.0;
    p.prepare();
    const auto plan = greedy_plan(p);
    CHECK(plan.assignment == std::vector<int>{1});
    CHECK(plan.supply_share.isApprox(vec({1.0 / 6, 5.0 / 6})));
  }
  SUBCASE("never better than the swarm on small instances") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto p = testing::toy_problem(1000 + seed);
      Rng rng = make_rng(seed, Stream::optimizer);
      CHECK(fitness(greedy_plan(p), p, {}) >= pso_optimize(p, SwarmConfig{}, rng).best_score);
    }
  }
}

}  // TEST_SUITE
