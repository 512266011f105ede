#include "support.hpp"

#include "rescue/engine.hpp"
#include "rescue/errors.hpp"

#include <doctest.h>

#include <set>

using namespace rescue;

namespace {

EngineConfig quick_config(Policy policy, std::uint64_t seed) {
  EngineConfig c;
  c.policy = policy;
  c.seed = seed;
  c.swarm.particle_count = 30;
  c.swarm.iterations = 20;
  return c;
}

ScenarioSpec calm(ScenarioSpec s) {
  s.hazard.rainfall_mm_per_tick = 0.0;
  s.hazard.sources.clear();
  s.hazard.ignitions.clear();
  s.hazard.perturbation_probability = 0.0;
  return s;
}

LogRecord reach(double minutes, int survivors) {
  LogRecord r;
  r.event = EventType::reach;
  r.time_min = minutes;
  r.survivors = survivors;
  return r;
}

LogRecord tick(int t) {
  LogRecord r;
  r.tick = t;
  r.time_min = t * 0.75;
  return r;
}

bool same_records(const EpisodeLog& a, const EpisodeLog& b) {
  if (a.records.size() != b.records.size()) return false;
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    const auto& x = a.records[i];
    const auto& y = b.records[i];
    if (x.tick != y.tick || x.time_min != y.time_min || x.event != y.event || x.vehicle != y.vehicle ||
        x.cell != y.cell || x.survivors != y.survivors || x.supplies != y.supplies) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_SUITE("engine") {

TEST_CASE("metrics from a constructed log") {
  EpisodeLog log;
  log.total_survivors = 3000;
  log.horizon_ticks = 160;
  log.records = {tick(0), reach(10.0, 100), reach(20.0, 100)};
  log.latency_s = {0.2, 0.4};
  const auto m = compute_metrics(log);
  CHECK(m.coverage_pct == doctest::Approx(100.0 * 200 / 3000));
  CHECK(m.coverage_pct == doctest::Approx(6.67).epsilon(1e-3));
  CHECK(m.response_time_min == doctest::Approx(15.0));
  CHECK(m.decision_latency_s == doctest::Approx(0.3));
  CHECK(m.groups_reached == 2);
}

TEST_CASE("metrics conventions") {
  EpisodeLog log;
  log.total_survivors = 6000;
  log.horizon_ticks = 160;
  log.records = {tick(0), tick(1)};
  auto m = compute_metrics(log);
  CHECK(m.coverage_pct == 0.0);
  CHECK(m.response_time_min == doctest::Approx(120.0));
  CHECK(m.ticks == 2);

  log.records.push_back(reach(3.0, 6000));
  m = compute_metrics(log);
  CHECK(m.coverage_pct == doctest::Approx(100.0));

  CHECK_THROWS_AS(compute_metrics(EpisodeLog{}), ContractError);
}

TEST_CASE("policy and event names") {
  for (auto p : kAllPolicies) CHECK(parse_policy(to_string(p)) == p);
  CHECK(to_string(Policy::perception_only) == "perception_only");
  CHECK_THROWS_AS(parse_policy("cnn"), ConfigError);
  for (auto e : {EventType::tick, EventType::block, EventType::reach, EventType::lost}) {
    CHECK(parse_event(to_string(e)) == e);
  }
}

TEST_CASE("configuration errors surface before the loop") {
  const auto s = generate_scenario(1, HazardKind::flood, Preset::desk);
  EngineConfig c;
  c.horizon_ticks = 0;
  CHECK_THROWS_WITH_AS(run_episode(s, c), doctest::Contains("horizon"), ConfigError);
  c = {};
  c.replan_interval_ticks = 0;
  CHECK_THROWS_AS(run_episode(s, c), ConfigError);
  c = {};
  c.sensors.survivor_recall = 2.0;
  CHECK_THROWS_AS(run_episode(s, c), ConfigError);
  c = {};
  c.swarm.particle_count = 0;
  CHECK_THROWS_AS(run_episode(s, c), ConfigError);
}

TEST_CASE("episodes are deterministic") {
  for (auto policy : kAllPolicies) {
    const auto s = generate_scenario(2, HazardKind::wildfire, Preset::desk);
    auto c = quick_config(policy, 2);
    c.horizon_ticks = 30;
    const auto a = run_episode(s, c);
    const auto b = run_episode(s, c);
    CHECK(same_records(a.log, b.log));
    CHECK(a.metrics.coverage_pct == b.metrics.coverage_pct);
    CHECK(a.metrics.response_time_min == b.metrics.response_time_min);
    CHECK(a.artifacts.convergence == b.artifacts.convergence);
  }
}

TEST_CASE("without hazards every policy reaches everyone") {
  const auto s = calm(generate_scenario(3, HazardKind::flood, Preset::desk));
  for (auto policy : kAllPolicies) {
    CAPTURE(to_string(policy));
    auto c = quick_config(policy, 3);
    c.horizon_ticks = 2000;
    const auto r = run_episode(s, c);
    CHECK(r.metrics.coverage_pct == 100.0);
    CHECK(r.metrics.groups_lost == 0);
  }
}

TEST_CASE("benchmark flood log ticks every 45 seconds") {
  const auto s = generate_scenario(42, HazardKind::flood, Preset::benchmark);
  auto c = quick_config(Policy::hybrid, 42);
  c.horizon_ticks = 6;
  const auto r = run_episode(s, c);
  std::vector<const LogRecord*> ticks;
  for (const auto& rec : r.log.records) {
    if (rec.event == EventType::tick) ticks.push_back(&rec);
    CHECK(rec.tick < c.horizon_ticks);
    CHECK(rec.time_min >= rec.tick * 0.75);
    CHECK(rec.time_min <= (rec.tick + 1) * 0.75 + 1e-12);
  }
  REQUIRE(ticks.size() <= 6);
  REQUIRE_FALSE(ticks.empty());
  for (std::size_t i = 0; i < ticks.size(); ++i) {
    CHECK(ticks[i]->tick == static_cast<int>(i));
    CHECK(ticks[i]->time_min == doctest::Approx(0.75 * i));
  }
  CHECK(r.metrics.coverage_pct >= 0.0);
  CHECK(r.metrics.coverage_pct <= 100.0);
  CHECK(r.log.latency_s.size() == ticks.size());
}

TEST_CASE("supplies are conserved and reach counts never fall") {
  for (auto kind : {HazardKind::flood, HazardKind::wildfire}) {
    const auto s = generate_scenario(5, kind, Preset::desk);
    auto c = quick_config(Policy::perception_only, 5);
    c.horizon_ticks = 60;
    int last_reached = 0, last_delivered = 0, ticks = 0;
    const auto r = run_episode(s, c, [&](const TickView& v) {
      ++ticks;
      CHECK(v.supplies_delivered + v.supplies_on_vehicles + v.supplies_in_depots == s.supply_total);
      CHECK(v.survivors_reached >= last_reached);
      CHECK(v.supplies_delivered >= last_delivered);
      last_reached = v.survivors_reached;
      last_delivered = v.supplies_delivered;
      REQUIRE(v.priority);
      CHECK(v.priority->values.minCoeff() >= 0.0);
      CHECK(v.priority->values.maxCoeff() <= 1.0);
    });
    CHECK(ticks == r.metrics.ticks);
    CHECK(r.metrics.survivors_reached == last_reached);
    CHECK(r.metrics.supplies_delivered == last_delivered);
  }
}

TEST_CASE("ground vehicles never enter a blocked cell") {
  for (auto kind : {HazardKind::flood, HazardKind::wildfire}) {
    const auto s = generate_scenario(6, kind, Preset::desk);
    auto c = quick_config(Policy::hybrid, 6);
    c.horizon_ticks = 80;
    const auto r = run_episode(s, c);

    // replay the block/unblock records to know the mask in force at each tick
    std::set<Cell> blocked;
    int moves = 0;
    for (const auto& rec : r.log.records) {
      if (rec.event == EventType::block) blocked.insert(rec.cell);
      if (rec.event == EventType::unblock) blocked.erase(rec.cell);
      if (rec.event != EventType::move) continue;
      ++moves;
      if (s.vehicles[rec.vehicle].cls == VehicleClass::ground) CHECK(blocked.count(rec.cell) == 0);
    }
    CHECK(moves > 0);
  }
}

TEST_CASE("groups caught by the hazard stay uncovered") {
  const auto s = generate_scenario(7, HazardKind::wildfire, Preset::desk);
  const auto r = run_episode(s, quick_config(Policy::perception_only, 7));
  CHECK(r.metrics.groups_lost > 0);
  CHECK(r.metrics.groups_reached + r.metrics.groups_lost <= static_cast<int>(s.survivors.size()));
  CHECK(r.metrics.coverage_pct < 100.0);
}

TEST_CASE("snapshot artifacts") {
  const auto s = generate_scenario(8, HazardKind::flood, Preset::desk);
  auto c = quick_config(Policy::hybrid, 8);
  c.horizon_ticks = 3;
  const auto r = run_episode(s, c);
  REQUIRE(r.artifacts.has_snapshot);
  CHECK(r.artifacts.priority.values.rows() == kRasterSide);
  CHECK(r.artifacts.convergence.size() == static_cast<std::size_t>(c.swarm.iterations + 1));
  CHECK(r.artifacts.tracks.size() == s.vehicles.size());

  c.policy = Policy::perception_only;
  CHECK(run_episode(s, c).artifacts.convergence.empty());

  const auto p = initial_problem(s, c);
  CHECK(p.zone_count() > 0);
  CHECK(p.vehicle_count() == 15);
  CHECK(p.horizon_ticks == c.horizon_ticks);
}

}  // TEST_SUITE
