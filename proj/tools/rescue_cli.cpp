// Command-line front end: scenario generation, single episodes, the benchmark
// protocol and figure-data export.

#include "rescue/engine.hpp"
#include "rescue/errors.hpp"
#include "rescue/figures.hpp"
#include "rescue/harness.hpp"
#include "rescue/scenario.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace rescue;

namespace {

struct EngineFlags {
  int particles = 120;
  int iterations = 100;
  double inertia = 0.7;
  int horizon = 160;
  int replan = 1;
  int planning_horizon = EngineConfig{}.planning_horizon_ticks;
  bool serial = false;

  void add(CLI::App* app) {
    app->add_option("--particles", particles, "Swarm size")->capture_default_str();
    app->add_option("--iterations", iterations, "Swarm iterations")->capture_default_str();
    app->add_option("--inertia", inertia, "Swarm inertia weight")->capture_default_str();
    app->add_option("--horizon", horizon, "Episode length in ticks")->capture_default_str();
    app->add_option("--replan", replan, "Ticks between planning cycles")->capture_default_str();
    app->add_option("--planning-horizon", planning_horizon, "Rollout length in ticks")->capture_default_str();
    app->add_flag("--serial", serial, "Evaluate particles on one thread");
  }

  EngineConfig config() const {
    EngineConfig c;
    c.swarm.particle_count = particles;
    c.swarm.iterations = iterations;
    c.swarm.inertia = inertia;
    c.swarm.parallel = !serial;
    c.horizon_ticks = horizon;
    c.replan_interval_ticks = replan;
    c.planning_horizon_ticks = planning_horizon;
    return c;
  }
};

struct BenchFlags {
  std::string preset = "desk";
  std::vector<std::string> hazards{"flood", "wildfire"};
  std::vector<std::string> policies{"hybrid", "perception_only", "pso_only", "simulated_annealing"};
  int reps = 30;
  std::uint64_t seed = 1;
  std::string out;
  bool quiet = false;

  void add(CLI::App* app) {
    app->add_option("--preset", preset, "desk or benchmark")->capture_default_str();
    app->add_option("--hazards", hazards, "Hazard kinds")->capture_default_str();
    app->add_option("--policies", policies, "Policies to compare")->capture_default_str();
    app->add_option("--reps", reps, "Repetitions per hazard")->capture_default_str();
    app->add_option("--seed", seed, "Base seed")->capture_default_str();
    app->add_option("-o,--out", out, "Output directory")->required();
    app->add_flag("-q,--quiet", quiet, "No progress output");
  }

  BenchConfig config(const EngineFlags& engine) const {
    BenchConfig c;
    c.preset = parse_preset(preset);
    c.preset_params = preset_params(c.preset);
    c.hazards.clear();
    for (const auto& h : hazards) c.hazards.push_back(parse_hazard_kind(h));
    c.policies.clear();
    for (const auto& p : policies) c.policies.push_back(parse_policy(p));
    c.repetitions = reps;
    c.base_seed = seed;
    c.output_dir = out;
    c.engine = engine.config();
    return c;
  }

  Progress progress() const {
    if (quiet) return {};
    return [](const RunRow& r) {
      std::fprintf(stderr, "%s %-19s rep %3d  coverage %6.2f%%  response %6.2f min  latency %.3f s\n",
                   std::string(to_string(r.hazard)).c_str(), std::string(to_string(r.policy)).c_str(), r.rep,
                   r.metrics.coverage_pct, r.metrics.response_time_min, r.metrics.decision_latency_s);
    };
  }
};

// Keys of the JSON object are long option names of the chosen subcommand; their values replace the flag values.
void apply_config_file(CLI::App* sub, const std::string& path) {
  const auto doc = nlohmann::json::parse(read_text(path), nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw ConfigError("config: " + path + " is not a JSON object");
  auto text = [](const nlohmann::json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
  for (const auto& [key, value] : doc.items()) {
    CLI::Option* opt = nullptr;
    try {
      opt = sub->get_option("--" + key);
    } catch (const CLI::OptionNotFound&) {
      throw ConfigError("config: unknown option '" + key + "' for " + sub->get_name());
    }
    std::vector<std::string> values;
    if (value.is_array()) {
      for (const auto& v : value) values.push_back(text(v));
    } else if (value.is_boolean()) {
      values.push_back(value.get<bool>() ? "true" : "false");
    } else {
      values.push_back(text(value));
    }
    opt->clear();
    opt->add_result(values);
    opt->run_callback();
  }
}

void print_metrics(HazardKind hazard, Policy policy, const MetricsRecord& m) {
  RunRow row{hazard, policy, 0, m, {}};
  std::cout << runs_csv(std::span<const RunRow>(&row, 1));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Disaster-response planning simulator"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "JSON file whose entries override command-line flags");

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a scenario file");
  std::string gen_preset = "desk", gen_hazard = "flood", gen_out;
  std::uint64_t gen_seed = 1;
  gen->add_option("--preset", gen_preset, "desk or benchmark")->capture_default_str();
  gen->add_option("--hazard", gen_hazard, "flood or wildfire")->capture_default_str();
  gen->add_option("--seed", gen_seed, "Scenario seed")->capture_default_str();
  gen->add_option("-o,--out", gen_out, "Output file")->required();

  // run
  auto* run = app.add_subcommand("run", "Run one episode");
  EngineFlags run_engine;
  run_engine.add(run);
  std::string run_scenario, run_preset = "desk", run_hazard = "flood", run_policy = "hybrid", run_out;
  std::uint64_t run_seed = 1;
  run->add_option("--scenario", run_scenario, "Scenario file (otherwise generated)");
  run->add_option("--preset", run_preset, "desk or benchmark")->capture_default_str();
  run->add_option("--hazard", run_hazard, "flood or wildfire")->capture_default_str();
  run->add_option("--seed", run_seed, "Scenario and episode seed")->capture_default_str();
  run->add_option("--policy", run_policy, "Planning policy")->capture_default_str();
  run->add_option("-o,--out", run_out, "Run artifact directory");

  // bench, sweep, scale
  auto* bench = app.add_subcommand("bench", "Compare policies over paired repetitions");
  EngineFlags bench_engine;
  BenchFlags bench_flags;
  bench_engine.add(bench);
  bench_flags.add(bench);

  auto* sweep = app.add_subcommand("sweep", "Hybrid policy per inertia weight");
  EngineFlags sweep_engine;
  BenchFlags sweep_flags;
  std::vector<double> inertias{0.5, 0.7, 0.9};
  sweep_engine.add(sweep);
  sweep_flags.add(sweep);
  sweep->add_option("--inertias", inertias, "Inertia weights")->capture_default_str();

  auto* scale = app.add_subcommand("scale", "Policies per map area with a fixed fleet");
  EngineFlags scale_engine;
  BenchFlags scale_flags;
  std::vector<double> areas{25.0, 50.0};
  scale_engine.add(scale);
  scale_flags.add(scale);
  scale->add_option("--areas", areas, "Areas in km^2")->capture_default_str();

  // export
  auto* exp = app.add_subcommand("export", "Figure data from run directories");
  std::string exp_kind;
  std::vector<std::string> exp_runs;
  std::string exp_out;
  exp->add_option("--kind", exp_kind, "routes, heatmap or convergence")->required();
  exp->add_option("--run", exp_runs, "Run directories")->required();
  exp->add_option("-o,--out", exp_out, "Output file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (!config_path.empty()) {
      for (auto* sub : app.get_subcommands()) apply_config_file(sub, config_path);
    }

    if (gen->parsed()) {
      const auto spec = generate_scenario(gen_seed, parse_hazard_kind(gen_hazard), parse_preset(gen_preset));
      write_scenario(spec, gen_out);
      std::cout << "wrote " << gen_out << " (" << spec.grid.side_cells << "x" << spec.grid.side_cells << ", "
                << spec.survivors.size() << " groups, " << spec.total_survivors() << " survivors)\n";
    } else if (run->parsed()) {
      const ScenarioSpec spec = run_scenario.empty()
                                    ? generate_scenario(run_seed, parse_hazard_kind(run_hazard), parse_preset(run_preset))
                                    : read_scenario(run_scenario);
      EngineConfig config = run_engine.config();
      config.policy = parse_policy(run_policy);
      config.seed = run_seed;
      const auto result = run_episode(spec, config);
      if (!run_out.empty()) write_run_artifacts(run_out, spec, config, result);
      print_metrics(spec.hazard_kind, config.policy, result.metrics);
    } else if (bench->parsed()) {
      const auto result = run_benchmark(bench_flags.config(bench_engine), bench_flags.progress());
      std::cout << summary_csv(result.summary);
    } else if (sweep->parsed()) {
      const auto result = sensitivity_sweep(inertias, sweep_flags.config(sweep_engine), sweep_flags.progress());
      std::cout << read_text(fs::path(sweep_flags.out) / "sweep.csv");
      (void)result;
    } else if (scale->parsed()) {
      const auto result = scalability_test(areas, scale_flags.config(scale_engine), scale_flags.progress());
      std::cout << read_text(fs::path(scale_flags.out) / "scale.csv");
      (void)result;
    } else if (exp->parsed()) {
      std::vector<fs::path> dirs(exp_runs.begin(), exp_runs.end());
      for (const auto& f : export_figure_data(dirs, parse_figure_kind(exp_kind), exp_out)) {
        std::cout << "wrote " << f.string() << "\n";
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
