#include "rescue/harness.hpp"

#include "rescue/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace rescue {

namespace {

constexpr double kZ95 = 1.959963984540054;

std::string fmt(double value, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, value);
  return buf;
}

std::string stat_cells(const Stat& s) {
  return fmt(s.mean) + "," + fmt(s.sd) + "," + fmt(s.ci95) + "," + fmt(s.min) + "," + fmt(s.max);
}

std::string stat_header(const std::string& name) {
  return name + "_mean," + name + "_sd," + name + "_ci95," + name + "_min," + name + "_max";
}

template <typename F>
Stat stat_of(std::span<const RunRow> runs, F field) {
  std::vector<double> values;
  values.reserve(runs.size());
  for (const auto& r : runs) values.push_back(field(r.metrics));
  return summarize(values);
}

RunRow run_one(const ScenarioSpec& scenario, const BenchConfig& config, HazardKind hazard, Policy policy, int rep,
               std::uint64_t seed) {
  EngineConfig engine = config.engine;
  engine.policy = policy;
  engine.seed = seed;
  engine.snapshot_tick = 0;
  auto result = run_episode(scenario, engine);
  return {hazard, policy, rep, result.metrics, std::move(result.artifacts.convergence)};
}

}  // namespace

void BenchConfig::validate() const {
  if (repetitions < 1) throw ConfigError("repetitions: must be at least 1");
  if (hazards.empty()) throw ConfigError("hazards: must not be empty");
  if (policies.empty()) throw ConfigError("policies: must not be empty");
  preset_params.validate();
  engine.validate();
}

Stat summarize(std::span<const double> values) {
  Stat s;
  if (values.empty()) return s;
  const double n = static_cast<double>(values.size());
  s.min = s.max = values.front();
  double sum = 0.0;
  for (double v : values) {
    sum += v;
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
  }
  s.mean = sum / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / (n - 1.0));
    s.ci95 = kZ95 * s.sd / std::sqrt(n);
  }
  // Guard the mean against rounding outside the observed range.
  s.mean = std::clamp(s.mean, s.min, s.max);
  return s;
}

const SummaryRow& SummaryTable::at(HazardKind hazard, Policy policy) const {
  for (const auto& row : rows) {
    if (row.hazard == hazard && row.policy == policy) return row;
  }
  throw ContractError("SummaryTable: no row for " + std::string(to_string(hazard)) + "/" +
                      std::string(to_string(policy)));
}

SummaryTable summarize_runs(std::span<const RunRow> runs, std::span<const HazardKind> hazards,
                            std::span<const Policy> policies) {
  SummaryTable table;
  for (HazardKind h : hazards) {
    for (Policy p : policies) {
      std::vector<RunRow> subset;
      for (const auto& r : runs) {
        if (r.hazard == h && r.policy == p) subset.push_back(r);
      }
      SummaryRow row;
      row.hazard = h;
      row.policy = p;
      row.runs = static_cast<int>(subset.size());
      row.response_time_min = stat_of(subset, [](const MetricsRecord& m) { return m.response_time_min; });
      row.coverage_pct = stat_of(subset, [](const MetricsRecord& m) { return m.coverage_pct; });
      row.decision_latency_s = stat_of(subset, [](const MetricsRecord& m) { return m.decision_latency_s; });
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

BenchResult run_benchmark(const BenchConfig& config, const Progress& progress) {
  config.validate();
  if (!config.output_dir.empty()) ensure_writable_dir(config.output_dir);

  BenchResult result;
  for (HazardKind hazard : config.hazards) {
    for (int rep = 0; rep < config.repetitions; ++rep) {
      const std::uint64_t seed = repetition_seed(config.base_seed, rep);
      const ScenarioSpec scenario = generate_scenario(seed, hazard, config.preset_params);
      for (Policy policy : config.policies) {
        result.runs.push_back(run_one(scenario, config, hazard, policy, rep, seed));
        if (progress) progress(result.runs.back());
      }
    }
  }
  result.summary = summarize_runs(result.runs, config.hazards, config.policies);

  if (!config.output_dir.empty()) {
    write_text(config.output_dir / "runs.csv", runs_csv(result.runs));
    write_text(config.output_dir / "summary.csv", summary_csv(result.summary));
  }
  return result;
}

SweepResult sensitivity_sweep(std::span<const double> inertias, const BenchConfig& config,
                              const Progress& progress) {
  if (inertias.empty()) throw ConfigError("inertias: must not be empty");
  config.validate();
  if (!config.output_dir.empty()) ensure_writable_dir(config.output_dir);

  SweepResult result;
  for (double inertia : inertias) {
    BenchConfig local = config;
    local.engine.swarm.inertia = inertia;
    local.engine.swarm.validate();
    for (HazardKind hazard : config.hazards) {
      std::vector<RunRow> runs;
      for (int rep = 0; rep < config.repetitions; ++rep) {
        const std::uint64_t seed = repetition_seed(config.base_seed, rep);
        const ScenarioSpec scenario = generate_scenario(seed, hazard, config.preset_params);
        runs.push_back(run_one(scenario, local, hazard, Policy::hybrid, rep, seed));
        if (progress) progress(runs.back());
      }

      SweepRow row;
      row.inertia = inertia;
      row.hazard = hazard;
      row.runs = static_cast<int>(runs.size());
      row.response_time_min = stat_of(runs, [](const MetricsRecord& m) { return m.response_time_min; });
      row.coverage_pct = stat_of(runs, [](const MetricsRecord& m) { return m.coverage_pct; });
      int traced = 0;
      for (const auto& r : runs) {
        if (r.convergence.empty()) continue;
        if (row.mean_convergence.empty()) row.mean_convergence.assign(r.convergence.size(), 0.0);
        for (std::size_t i = 0; i < row.mean_convergence.size() && i < r.convergence.size(); ++i) {
          row.mean_convergence[i] += r.convergence[i];
        }
        ++traced;
      }
      for (double& v : row.mean_convergence) v /= std::max(traced, 1);
      result.rows.push_back(std::move(row));

      for (auto& r : runs) {
        result.runs.push_back(std::move(r));
        result.run_inertia.push_back(inertia);
      }
    }
  }

  if (!config.output_dir.empty()) {
    std::ostringstream sweep;
    sweep << "inertia,hazard,runs," << stat_header("response_time_min") << "," << stat_header("coverage_pct")
          << "\n";
    for (const auto& row : result.rows) {
      sweep << fmt(row.inertia, 3) << "," << to_string(row.hazard) << "," << row.runs << ","
            << stat_cells(row.response_time_min) << "," << stat_cells(row.coverage_pct) << "\n";
    }
    write_text(config.output_dir / "sweep.csv", sweep.str());

    std::ostringstream runs;
    runs << "inertia," << kRunsHeader << "\n";
    for (std::size_t i = 0; i < result.runs.size(); ++i) {
      const auto& r = result.runs[i];
      runs << fmt(result.run_inertia[i], 3) << "," << to_string(r.hazard) << "," << to_string(r.policy) << ","
           << r.rep << "," << fmt(r.metrics.response_time_min) << "," << fmt(r.metrics.coverage_pct) << ","
           << fmt(r.metrics.decision_latency_s) << "\n";
    }
    write_text(config.output_dir / "sweep_runs.csv", runs.str());

    std::ostringstream conv;
    conv << "inertia,hazard,iteration,gbest_score\n";
    for (const auto& row : result.rows) {
      for (std::size_t i = 0; i < row.mean_convergence.size(); ++i) {
        conv << fmt(row.inertia, 3) << "," << to_string(row.hazard) << "," << i << ","
             << fmt(row.mean_convergence[i], 9) << "\n";
      }
    }
    write_text(config.output_dir / "convergence.csv", conv.str());
  }
  return result;
}

PresetParams scaled_preset(const PresetParams& base, double area_km2) {
  if (!(area_km2 >= 1.0)) throw ConfigError("areas_km2: every area must be at least 1 km^2");
  PresetParams p = base;
  p.side_cells = side_cells_for_area(area_km2, base.cell_size_m);
  p.validate();
  return p;
}

ScaleResult scalability_test(std::span<const double> areas_km2, const BenchConfig& config,
                             const Progress& progress) {
  if (areas_km2.empty()) throw ConfigError("areas_km2: must not be empty");
  config.validate();
  for (double a : areas_km2) scaled_preset(config.preset_params, a);
  if (!config.output_dir.empty()) ensure_writable_dir(config.output_dir);

  ScaleResult result;
  for (double area : areas_km2) {
    BenchConfig local = config;
    local.preset_params = scaled_preset(config.preset_params, area);
    local.output_dir.clear();
    const auto bench = run_benchmark(local, progress);
    for (const auto& s : bench.summary.rows) {
      ScaleRow row;
      row.area_km2 = area;
      row.side_cells = local.preset_params.side_cells;
      row.hazard = s.hazard;
      row.policy = s.policy;
      row.runs = s.runs;
      row.response_time_min = s.response_time_min;
      row.coverage_pct = s.coverage_pct;
      row.decision_latency_s = s.decision_latency_s;
      result.rows.push_back(row);
    }
    for (const auto& r : bench.runs) {
      result.runs.push_back(r);
      result.run_area.push_back(area);
    }
  }

  if (!config.output_dir.empty()) {
    std::ostringstream table;
    table << "area_km2,side_cells,hazard,policy,runs," << stat_header("response_time_min") << ","
          << stat_header("coverage_pct") << "," << stat_header("decision_latency_s") << "\n";
    for (const auto& row : result.rows) {
      table << fmt(row.area_km2, 3) << "," << row.side_cells << "," << to_string(row.hazard) << ","
            << to_string(row.policy) << "," << row.runs << "," << stat_cells(row.response_time_min) << ","
            << stat_cells(row.coverage_pct) << "," << stat_cells(row.decision_latency_s) << "\n";
    }
    write_text(config.output_dir / "scale.csv", table.str());

    std::ostringstream runs;
    runs << "area_km2," << kRunsHeader << "\n";
    for (std::size_t i = 0; i < result.runs.size(); ++i) {
      const auto& r = result.runs[i];
      runs << fmt(result.run_area[i], 3) << "," << to_string(r.hazard) << "," << to_string(r.policy) << ","
           << r.rep << "," << fmt(r.metrics.response_time_min) << "," << fmt(r.metrics.coverage_pct) << ","
           << fmt(r.metrics.decision_latency_s) << "\n";
    }
    write_text(config.output_dir / "scale_runs.csv", runs.str());
  }
  return result;
}

std::string runs_csv(std::span<const RunRow> runs) {
  std::ostringstream out;
  out << kRunsHeader << "\n";
  for (const auto& r : runs) {
    out << to_string(r.hazard) << "," << to_string(r.policy) << "," << r.rep << "," << fmt(r.metrics.response_time_min)
        << "," << fmt(r.metrics.coverage_pct) << "," << fmt(r.metrics.decision_latency_s) << "\n";
  }
  return out.str();
}

std::string summary_csv(const SummaryTable& table) {
  std::ostringstream out;
  out << "hazard,policy,runs," << stat_header("response_time_min") << "," << stat_header("coverage_pct") << ","
      << stat_header("decision_latency_s") << "\n";
  for (const auto& row : table.rows) {
    out << to_string(row.hazard) << "," << to_string(row.policy) << "," << row.runs << ","
        << stat_cells(row.response_time_min) << "," << stat_cells(row.coverage_pct) << ","
        << stat_cells(row.decision_latency_s) << "\n";
  }
  return out.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void ensure_writable_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (!std::filesystem::is_directory(dir)) throw IoError("output directory unavailable: " + dir.string());
  const auto probe = dir / ".write_probe";
  {
    std::ofstream out(probe);
    if (!out) throw IoError("output directory not writable: " + dir.string());
  }
  std::filesystem::remove(probe, ec);
}

}  // namespace rescue
