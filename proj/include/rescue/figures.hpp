#pragma once

#include "rescue/engine.hpp"
#include "rescue/scenario.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rescue {

enum class FigureKind { routes, heatmap, convergence };

std::string_view to_string(FigureKind kind);
FigureKind parse_figure_kind(std::string_view text);

// Files of a run directory
inline constexpr const char* kScenarioFile = "scenario.json";
inline constexpr const char* kRunInfoFile = "run.json";
inline constexpr const char* kMetricsFile = "metrics.csv";
inline constexpr const char* kEpisodeLogFile = "episode_log.csv";
inline constexpr const char* kTracksFile = "tracks.csv";
inline constexpr const char* kPriorityFile = "priority.csv";
inline constexpr const char* kDetectionsFile = "detections.csv";
inline constexpr const char* kZonesFile = "zones.csv";
inline constexpr const char* kConvergenceFile = "convergence.csv";

/// Everything `export_figure_data` needs later, plus the episode log.
void write_run_artifacts(const std::filesystem::path& dir, const ScenarioSpec& scenario, const EngineConfig& config,
                         const EpisodeResult& result);

std::string episode_log_csv(const EpisodeLog& log);
/// Records only; throws ParseError naming the line.
std::vector<LogRecord> parse_episode_log(std::string_view text);

/// Grid of values as comma-separated rows.
std::string grid_csv(const GridD& grid, int digits = 6);
GridD parse_grid_csv(std::string_view text);

/// Binary greyscale image, 0 -> black, 1 -> white.
std::string grid_pgm(const GridD& grid);

/// routes and heatmap take exactly one run directory; convergence takes one per series.
/// Returns the files written. Throws IoError naming a missing artifact.
std::vector<std::filesystem::path> export_figure_data(std::span<const std::filesystem::path> run_dirs,
                                                      FigureKind kind, const std::filesystem::path& out);

}  // namespace rescue
