#include "rescue/figures.hpp"

#include "rescue/errors.hpp"
#include "rescue/harness.hpp"
#include "rescue/perception.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

namespace rescue {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string num(double value, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, value);
  return buf;
}

std::vector<std::string_view> split(std::string_view line, char sep = ',') {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  for (auto line : split(text, '\n')) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

template <typename T>
T parse_number(std::string_view field, std::size_t line_no) {
  T value{};
  const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
    throw ParseError("line " + std::to_string(line_no) + ": bad number '" + std::string(field) + "'");
  }
  return value;
}

std::string require(const fs::path& dir, const char* name) {
  const fs::path path = dir / name;
  if (!fs::exists(path)) throw IoError("missing artifact: " + path.string());
  return read_text(path);
}

// Table rows after the header, split into fields of the expected count. Views into `text`.
std::vector<std::vector<std::string_view>> table_rows(std::string_view text, std::size_t fields,
                                                      const std::string& what) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw ParseError(what + ": empty file");
  std::vector<std::vector<std::string_view>> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto f = split(lines[i]);
    if (f.size() != fields) {
      throw ParseError(what + ": line " + std::to_string(i + 1) + ": expected " + std::to_string(fields) + " fields");
    }
    rows.push_back(std::move(f));
  }
  return rows;
}

}  // namespace

std::string_view to_string(FigureKind kind) {
  switch (kind) {
    case FigureKind::routes: return "routes";
    case FigureKind::heatmap: return "heatmap";
    case FigureKind::convergence: return "convergence";
  }
  return "unknown";
}

FigureKind parse_figure_kind(std::string_view text) {
  for (FigureKind k : {FigureKind::routes, FigureKind::heatmap, FigureKind::convergence}) {
    if (to_string(k) == text) return k;
  }
  throw ConfigError("kind: unknown value '" + std::string(text) + "'");
}

std::string episode_log_csv(const EpisodeLog& log) {
  std::ostringstream out;
  out << "tick,time_min,event,vehicle,row,col,survivors,supplies\n";
  for (const auto& r : log.records) {
    out << r.tick << "," << num(r.time_min, 4) << "," << to_string(r.event) << "," << r.vehicle << "," << r.cell.row
        << "," << r.cell.col << "," << r.survivors << "," << r.supplies << "\n";
  }
  return out.str();
}

std::vector<LogRecord> parse_episode_log(std::string_view text) {
  const auto lines = lines_of(text);
  std::vector<LogRecord> records;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split(lines[i]);
    const std::size_t line_no = i + 1;
    if (f.size() != 8) throw ParseError("episode log: line " + std::to_string(line_no) + ": expected 8 fields");
    LogRecord r;
    r.tick = parse_number<int>(f[0], line_no);
    r.time_min = parse_number<double>(f[1], line_no);
    r.event = parse_event(f[2]);
    r.vehicle = parse_number<int>(f[3], line_no);
    r.cell = {parse_number<int>(f[4], line_no), parse_number<int>(f[5], line_no)};
    r.survivors = parse_number<int>(f[6], line_no);
    r.supplies = parse_number<int>(f[7], line_no);
    records.push_back(r);
  }
  return records;
}

std::string grid_csv(const GridD& grid, int digits) {
  std::string out;
  out.reserve(static_cast<std::size_t>(grid.size()) * (digits + 3));
  for (Eigen::Index r = 0; r < grid.rows(); ++r) {
    for (Eigen::Index c = 0; c < grid.cols(); ++c) {
      if (c) out += ',';
      out += num(grid(r, c), digits);
    }
    out += '\n';
  }
  return out;
}

GridD parse_grid_csv(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw ParseError("grid: empty file");
  const auto cols = split(lines.front()).size();
  GridD grid(static_cast<Eigen::Index>(lines.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < lines.size(); ++r) {
    const auto f = split(lines[r]);
    if (f.size() != cols) throw ParseError("grid: line " + std::to_string(r + 1) + ": ragged row");
    for (std::size_t c = 0; c < cols; ++c) grid(r, c) = parse_number<double>(f[c], r + 1);
  }
  return grid;
}

std::string grid_pgm(const GridD& grid) {
  std::string out = "P5\n" + std::to_string(grid.cols()) + " " + std::to_string(grid.rows()) + "\n255\n";
  for (Eigen::Index r = 0; r < grid.rows(); ++r) {
    for (Eigen::Index c = 0; c < grid.cols(); ++c) {
      const double v = std::clamp(grid(r, c), 0.0, 1.0);
      out += static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0)));
    }
  }
  return out;
}

void write_run_artifacts(const fs::path& dir, const ScenarioSpec& scenario, const EngineConfig& config,
                         const EpisodeResult& result) {
  ensure_writable_dir(dir);
  write_scenario(scenario, dir / kScenarioFile);

  const auto& m = result.metrics;
  const auto& log = result.log;
  json info = {
      {"policy", std::string(to_string(config.policy))},
      {"seed", config.seed},
      {"inertia", config.swarm.inertia},
      {"horizon_ticks", config.horizon_ticks},
      {"replan_interval_ticks", config.replan_interval_ticks},
      {"world_side", scenario.grid.side_cells},
      {"snapshot_tick", result.artifacts.has_snapshot ? result.artifacts.snapshot_tick : -1},
      {"log",
       {{"total_survivors", log.total_survivors},
        {"supply_total", log.supply_total},
        {"horizon_ticks", log.horizon_ticks},
        {"tick_seconds", log.tick_seconds}}},
      {"metrics",
       {{"response_time_min", m.response_time_min},
        {"coverage_pct", m.coverage_pct},
        {"decision_latency_s", m.decision_latency_s},
        {"ticks", m.ticks},
        {"survivors_reached", m.survivors_reached},
        {"groups_reached", m.groups_reached},
        {"groups_lost", m.groups_lost},
        {"supplies_delivered", m.supplies_delivered}}},
  };
  write_text(dir / kRunInfoFile, info.dump(2) + "\n");

  RunRow row{scenario.hazard_kind, config.policy, 0, m, {}};
  write_text(dir / kMetricsFile, runs_csv(std::span<const RunRow>(&row, 1)));
  write_text(dir / kEpisodeLogFile, episode_log_csv(log));

  std::ostringstream tracks;
  tracks << "vehicle,class,seq,tick,row,col\n";
  for (std::size_t v = 0; v < result.artifacts.tracks.size(); ++v) {
    const auto& t = result.artifacts.tracks[v];
    for (std::size_t i = 0; i < t.points.size(); ++i) {
      tracks << v << "," << to_string(t.cls) << "," << i << "," << t.points[i].tick << "," << t.points[i].cell.row
             << "," << t.points[i].cell.col << "\n";
    }
  }
  write_text(dir / kTracksFile, tracks.str());

  const auto& art = result.artifacts;
  if (!art.has_snapshot) return;

  write_text(dir / kPriorityFile, grid_csv(art.priority.values));

  std::ostringstream det;
  det << "row,col,estimated_survivors\n";
  for (const auto& d : art.detections) det << d.cell.row << "," << d.cell.col << "," << d.estimated_survivors << "\n";
  write_text(dir / kDetectionsFile, det.str());

  std::ostringstream zones;
  zones << "zone,severity,pixel_row,pixel_col\n";
  for (const auto& z : art.zones) {
    for (const auto idx : z.member_pixels) {
      const Cell p = cell_at(idx, kRasterSide);
      zones << z.id << "," << num(z.severity, 4) << "," << p.row << "," << p.col << "\n";
    }
  }
  write_text(dir / kZonesFile, zones.str());

  if (!art.convergence.empty()) {
    std::ostringstream conv;
    conv << "iteration,gbest_score\n";
    for (std::size_t i = 0; i < art.convergence.size(); ++i) conv << i << "," << num(art.convergence[i], 9) << "\n";
    write_text(dir / kConvergenceFile, conv.str());
  }
}

namespace {

std::vector<fs::path> export_routes(const fs::path& dir, const fs::path& out) {
  const ScenarioSpec scenario = scenario_from_text(require(dir, kScenarioFile));
  const std::string tracks_text = require(dir, kTracksFile);
  const std::string zones_text = require(dir, kZonesFile);
  const auto tracks = table_rows(tracks_text, 6, kTracksFile);
  const auto zone_rows = table_rows(zones_text, 4, kZonesFile);
  const int n = scenario.grid.side_cells;

  std::ostringstream csv;
  csv << "layer,id,class,seq,tick,x,y\n";
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    const auto& f = tracks[i];
    const int row = parse_number<int>(f[4], i + 2);
    const int col = parse_number<int>(f[5], i + 2);
    csv << "vehicle," << f[0] << "," << f[1] << "," << f[2] << "," << f[3] << "," << num(col + 0.5, 3) << ","
        << num(row + 0.5, 3) << "\n";
  }

  // Zone outlines: member pixels with a 4-neighbour outside the zone, in world units.
  std::map<int, std::set<Eigen::Index>> members;
  for (std::size_t i = 0; i < zone_rows.size(); ++i) {
    const auto& f = zone_rows[i];
    const int z = parse_number<int>(f[0], i + 2);
    const Cell p{parse_number<int>(f[2], i + 2), parse_number<int>(f[3], i + 2)};
    if (!in_bounds(p, kRasterSide)) throw ParseError(std::string(kZonesFile) + ": pixel out of range");
    members[z].insert(linear_index(p, kRasterSide));
  }
  const double scale = static_cast<double>(n) / kRasterSide;
  for (const auto& [z, pixels] : members) {
    int seq = 0;
    for (const auto idx : pixels) {
      const Cell p = cell_at(idx, kRasterSide);
      bool edge = false;
      for (const Cell o : {Cell{-1, 0}, Cell{1, 0}, Cell{0, -1}, Cell{0, 1}}) {
        const Cell q = offset(p, o);
        edge = edge || !in_bounds(q, kRasterSide) || !pixels.count(linear_index(q, kRasterSide));
      }
      if (!edge) continue;
      csv << "zone," << z << ",zone," << seq++ << ",-1," << num((p.col + 0.5) * scale, 3) << ","
          << num((p.row + 0.5) * scale, 3) << "\n";
    }
  }

  for (std::size_t g = 0; g < scenario.survivors.size(); ++g) {
    const auto& s = scenario.survivors[g];
    csv << "survivor," << g << "," << s.size << ",0,-1," << num(s.cell.col + 0.5, 3) << "," << num(s.cell.row + 0.5, 3)
        << "\n";
  }
  for (std::size_t d = 0; d < scenario.depots.size(); ++d) {
    const auto& s = scenario.depots[d];
    csv << "depot," << d << "," << s.stock << ",0,-1," << num(s.cell.col + 0.5, 3) << "," << num(s.cell.row + 0.5, 3)
        << "\n";
  }
  write_text(out, csv.str());
  return {out};
}

std::vector<fs::path> export_heatmap(const fs::path& dir, const fs::path& out) {
  const GridD values = parse_grid_csv(require(dir, kPriorityFile));
  if (values.rows() != kRasterSide || values.cols() != kRasterSide) {
    throw ParseError(std::string(kPriorityFile) + ": expected a 256x256 grid");
  }
  if (!((values >= 0.0) && (values <= 1.0)).all()) throw ValidationError("priority map: values outside [0, 1]");
  const std::string detections_text = require(dir, kDetectionsFile);
  const auto detections = table_rows(detections_text, 3, kDetectionsFile);
  const json info = json::parse(require(dir, kRunInfoFile));
  const int n = info.at("world_side").get<int>();

  write_text(out, grid_csv(values));

  fs::path points = out;
  points.replace_filename(out.stem().string() + "_points.csv");
  std::ostringstream csv;
  csv << "x,y,estimated_survivors\n";
  const double scale = static_cast<double>(kRasterSide) / n;
  for (std::size_t i = 0; i < detections.size(); ++i) {
    const auto& f = detections[i];
    const int row = parse_number<int>(f[0], i + 2);
    const int col = parse_number<int>(f[1], i + 2);
    csv << num((col + 0.5) * scale, 3) << "," << num((row + 0.5) * scale, 3) << "," << f[2] << "\n";
  }
  write_text(points, csv.str());

  fs::path image = out;
  image.replace_extension(".pgm");
  write_text(image, grid_pgm(values));
  return {out, points, image};
}

std::vector<fs::path> export_convergence(std::span<const fs::path> dirs, const fs::path& out) {
  std::ostringstream csv;
  csv << "inertia,iteration,gbest_score\n";
  for (const auto& dir : dirs) {
    const json info = json::parse(require(dir, kRunInfoFile));
    const double inertia = info.at("inertia").get<double>();
    const std::string text = require(dir, kConvergenceFile);
    const auto rows = table_rows(text, 2, kConvergenceFile);
    for (const auto& f : rows) csv << num(inertia, 3) << "," << f[0] << "," << f[1] << "\n";
  }
  write_text(out, csv.str());
  return {out};
}

}  // namespace

std::vector<fs::path> export_figure_data(std::span<const fs::path> run_dirs, FigureKind kind, const fs::path& out) {
  if (run_dirs.empty()) throw ConfigError("run: at least one run directory is required");
  for (const auto& dir : run_dirs) {
    if (!fs::is_directory(dir)) throw IoError("missing artifact: run directory " + dir.string());
  }
  if (kind != FigureKind::convergence && run_dirs.size() != 1) {
    throw ConfigError("run: " + std::string(to_string(kind)) + " export takes exactly one run directory");
  }
  switch (kind) {
    case FigureKind::routes: return export_routes(run_dirs.front(), out);
    case FigureKind::heatmap: return export_heatmap(run_dirs.front(), out);
    case FigureKind::convergence: return export_convergence(run_dirs, out);
  }
  return {};
}

}  // namespace rescue
