#pragma once

#include "rescue/engine.hpp"
#include "rescue/scenario.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace rescue {

struct BenchConfig {
  std::vector<HazardKind> hazards{HazardKind::flood, HazardKind::wildfire};
  std::vector<Policy> policies{std::begin(kAllPolicies), std::end(kAllPolicies)};
  int repetitions = 30;
  Preset preset = Preset::desk;
  PresetParams preset_params = desk_preset();  // used as-is; preset only labels it
  std::uint64_t base_seed = 1;
  std::filesystem::path output_dir;  // empty: nothing is written
  EngineConfig engine;               // policy and seed are set per run

  void validate() const;  // throws ConfigError
};

/// Seed of repetition `rep`; shared by every policy of that repetition.
inline std::uint64_t repetition_seed(std::uint64_t base_seed, int rep) {
  return base_seed ^ static_cast<std::uint64_t>(rep);
}

struct RunRow {
  HazardKind hazard = HazardKind::flood;
  Policy policy = Policy::hybrid;
  int rep = 0;
  MetricsRecord metrics;
  std::vector<double> convergence;  // gbest trace of the first planning cycle
};

struct Stat {
  double mean = 0.0;
  double sd = 0.0;    // sample standard deviation, 0 for a single value
  double ci95 = 0.0;  // normal-approximation half-width
  double min = 0.0;
  double max = 0.0;
};

Stat summarize(std::span<const double> values);

struct SummaryRow {
  HazardKind hazard = HazardKind::flood;
  Policy policy = Policy::hybrid;
  int runs = 0;
  Stat response_time_min;
  Stat coverage_pct;
  Stat decision_latency_s;
};

struct SummaryTable {
  std::vector<SummaryRow> rows;

  /// Throws ContractError if the pair is absent.
  const SummaryRow& at(HazardKind hazard, Policy policy) const;
};

SummaryTable summarize_runs(std::span<const RunRow> runs, std::span<const HazardKind> hazards,
                            std::span<const Policy> policies);

struct BenchResult {
  std::vector<RunRow> runs;
  SummaryTable summary;
};

using Progress = std::function<void(const RunRow&)>;

/// Paired protocol: every policy of a repetition runs on the same scenario.
/// Writes runs.csv and summary.csv when an output directory is set.
BenchResult run_benchmark(const BenchConfig& config, const Progress& progress = {});

struct SweepRow {
  double inertia = 0.0;
  HazardKind hazard = HazardKind::flood;
  int runs = 0;
  Stat response_time_min;
  Stat coverage_pct;
  std::vector<double> mean_convergence;  // per iteration, averaged over repetitions
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<RunRow> runs;  // hybrid runs, inertia-major
  std::vector<double> run_inertia;
};

/// Hybrid policy per inertia on identical seeds. Writes sweep.csv, sweep_runs.csv and convergence.csv.
SweepResult sensitivity_sweep(std::span<const double> inertias, const BenchConfig& config,
                              const Progress& progress = {});

struct ScaleRow {
  double area_km2 = 0.0;
  int side_cells = 0;
  HazardKind hazard = HazardKind::flood;
  Policy policy = Policy::hybrid;
  int runs = 0;
  Stat response_time_min;
  Stat coverage_pct;
  Stat decision_latency_s;
};

struct ScaleResult {
  std::vector<ScaleRow> rows;
  std::vector<RunRow> runs;
  std::vector<double> run_area;
};

/// Grid side follows the area; fleet, survivors, supplies and depots stay as in the preset.
/// Writes scale.csv and scale_runs.csv.
ScaleResult scalability_test(std::span<const double> areas_km2, const BenchConfig& config,
                             const Progress& progress = {});

/// Preset rescaled to the given area.
PresetParams scaled_preset(const PresetParams& base, double area_km2);

// Tables

inline constexpr const char* kRunsHeader = "hazard,policy,rep,response_time_min,coverage_pct,decision_latency_s";

std::string runs_csv(std::span<const RunRow> runs);
std::string summary_csv(const SummaryTable& table);

/// Writes `text` to `path`, creating parent directories. Throws IoError.
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

/// Throws IoError unless `dir` exists (or can be created) and accepts new files.
void ensure_writable_dir(const std::filesystem::path& dir);

}  // namespace rescue
