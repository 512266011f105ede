#include "rescue/perception.hpp"

#include "rescue/errors.hpp"

#include <numeric>
#include <queue>

namespace rescue {

namespace {

constexpr int kSensorRegionsPerSide = 4;
constexpr double kSurvivorSaturation = 1.0;  // smoothed survivors per cell at full channel intensity
constexpr int kPhantomGroupSize = 10;

}  // namespace

void SensorParams::validate() const {
  if (!(hazard_noise_sigma >= 0.0)) throw ConfigError("hazard_noise_sigma: must be non-negative");
  if (!(survivor_recall >= 0.0 && survivor_recall <= 1.0)) throw ConfigError("survivor_recall: must lie in [0, 1]");
  if (!(false_positive_rate >= 0.0 && false_positive_rate <= 1.0)) {
    throw ConfigError("false_positive_rate: must lie in [0, 1]");
  }
  if (!(survivor_footprint_cells >= 0.0)) throw ConfigError("survivor_footprint_cells: must be non-negative");
}

GridB resample_maxpool(const GridB& src, int out_side) {
  const int n = static_cast<int>(src.rows());
  GridB out(out_side, out_side);
  auto lo = [&](int p) { return p * n / out_side; };
  auto hi = [&](int p) { return ((p + 1) * n - 1) / out_side; };
  for (int r = 0; r < out_side; ++r) {
    for (int c = 0; c < out_side; ++c) {
      out(r, c) = src.block(lo(r), lo(c), hi(r) - lo(r) + 1, hi(c) - lo(c) + 1).any();
    }
  }
  return out;
}

Observation observe(const WorldState& world, const std::vector<bool>& pending, const SensorParams& params,
                    Rng& rng) {
  const auto& scenario = *world.scenario;
  const int n = world.side();
  Observation obs;
  obs.tick = world.tick;
  obs.world_side = n;

  const GridD intensity = hazard_intensity(world);
  obs.hazard = resample_bilinear(intensity, kRasterSide);
  if (params.hazard_noise_sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, params.hazard_noise_sigma);
    for (Eigen::Index i = 0; i < obs.hazard.size(); ++i) obs.hazard.data()[i] += noise(rng);
  }

  for (std::size_t g = 0; g < scenario.survivors.size(); ++g) {
    if (g < pending.size() && !pending[g]) continue;
    if (uniform01(rng) < params.survivor_recall) {
      obs.detections.push_back({scenario.survivors[g].cell, scenario.survivors[g].size});
    }
  }
  if (params.false_positive_rate > 0.0) {
    std::binomial_distribution<int> phantom_count(kRasterSide * kRasterSide, params.false_positive_rate);
    std::uniform_int_distribution<int> pixel(0, kRasterSide - 1);
    const int phantoms = phantom_count(rng);
    for (int i = 0; i < phantoms; ++i) {
      const int pr = pixel(rng);
      const int pc = pixel(rng);
      obs.detections.push_back({{world_cell_of_pixel(pr, n), world_cell_of_pixel(pc, n)}, kPhantomGroupSize});
    }
  }

  GridD density = GridD::Zero(n, n);
  for (const auto& d : obs.detections) density(d.cell.row, d.cell.col) += d.estimated_survivors;
  if (params.survivor_footprint_cells > 0.0) {
    // plain zero-padded convolution keeps the survivor total
    const auto k = gaussian_kernel(params.survivor_footprint_cells);
    const int radius = static_cast<int>(k.size() / 2);
    GridD rows = GridD::Zero(n, n), spread = GridD::Zero(n, n);
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) {
        for (int i = -radius; i <= radius; ++i) {
          if (c + i >= 0 && c + i < n) rows(r, c) += k(i + radius) * density(r, c + i);
        }
      }
    }
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) {
        for (int i = -radius; i <= radius; ++i) {
          if (r + i >= 0 && r + i < n) spread(r, c) += k(i + radius) * rows(r + i, c);
        }
      }
    }
    density = spread;
  }
  obs.survivors = resample_bilinear((density / kSurvivorSaturation).min(1.0).eval(), kRasterSide);

  obs.infrastructure = resample_maxpool(scenario.terrain.road, kRasterSide).cast<double>();

  const int regions = kSensorRegionsPerSide;
  obs.sensor_readings = Eigen::VectorXd::Zero(regions * regions);
  std::normal_distribution<double> sensor_noise(0.0, std::max(params.hazard_noise_sigma, 1e-12));
  for (int rr = 0; rr < regions; ++rr) {
    for (int rc = 0; rc < regions; ++rc) {
      const int r0 = rr * n / regions, r1 = (rr + 1) * n / regions;
      const int c0 = rc * n / regions, c1 = (rc + 1) * n / regions;
      double reading = intensity.block(r0, c0, r1 - r0, c1 - c0).mean();
      if (params.hazard_noise_sigma > 0.0) reading += sensor_noise(rng);
      obs.sensor_readings(rr * regions + rc) = reading;
    }
  }
  return obs;
}

Observation observe(const WorldState& world, const SensorParams& params, Rng& rng) {
  return observe(world, std::vector<bool>(world.scenario->survivors.size(), true), params, rng);
}

PriorityMap extract_priority_map(const Observation& obs, const KernelParams& kernel) {
  const GridD mixed = kernel.hazard_weight * obs.hazard + kernel.survivor_weight * obs.survivors +
                      kernel.infrastructure_weight * obs.infrastructure;
  return {min_max_normalize(convolve_separable(mixed, smoothing_kernel<double>(kernel.width)))};
}

std::vector<Zone> segment_zones(const PriorityMap& map, double threshold, int max_zones, int world_side) {
  const GridD& v = map.values;
  const Eigen::Index rows = v.rows();
  const Eigen::Index cols = v.cols();
  std::vector<char> seen(v.size(), 0);
  std::vector<Zone> zones;

  for (Eigen::Index start = 0; start < v.size(); ++start) {
    if (seen[start] || !(v.data()[start] > threshold)) continue;
    Zone zone;
    std::queue<Eigen::Index> frontier;
    frontier.push(start);
    seen[start] = 1;
    double sum_r = 0.0, sum_c = 0.0;
    while (!frontier.empty()) {
      const Eigen::Index idx = frontier.front();
      frontier.pop();
      zone.member_pixels.push_back(idx);
      zone.severity += v.data()[idx];
      const Cell p = cell_at(idx, cols);
      sum_r += p.row;
      sum_c += p.col;
      for (const Cell o : kNeighbors8) {
        const Cell q = offset(p, o);
        if (q.row < 0 || q.col < 0 || q.row >= rows || q.col >= cols) continue;
        const Eigen::Index qi = linear_index(q, cols);
        if (!seen[qi] && v.data()[qi] > threshold) {
          seen[qi] = 1;
          frontier.push(qi);
        }
      }
    }
    std::sort(zone.member_pixels.begin(), zone.member_pixels.end());
    const double count = static_cast<double>(zone.member_pixels.size());
    zone.centroid_row = sum_r / count;
    zone.centroid_col = sum_c / count;
    Eigen::Index nearest = zone.member_pixels.front();
    double best = kInfinity;
    for (const Eigen::Index idx : zone.member_pixels) {
      const Cell p = cell_at(idx, cols);
      const double d = std::hypot(p.row - zone.centroid_row, p.col - zone.centroid_col);
      if (d < best) {
        best = d;
        nearest = idx;
      }
    }
    const Cell px = cell_at(nearest, cols);
    zone.centroid = {world_cell_of_pixel(px.row, world_side, static_cast<int>(rows)),
                     world_cell_of_pixel(px.col, world_side, static_cast<int>(cols))};
    zones.push_back(std::move(zone));
  }

  std::stable_sort(zones.begin(), zones.end(),
                   [](const Zone& a, const Zone& b) { return a.severity > b.severity; });
  if (max_zones >= 0 && static_cast<int>(zones.size()) > max_zones) zones.resize(max_zones);
  for (std::size_t i = 0; i < zones.size(); ++i) zones[i].id = static_cast<int>(i);
  return zones;
}

void attach_detections(std::vector<Zone>& zones, const Observation& obs) {
  std::vector<int> label(static_cast<std::size_t>(kRasterSide) * kRasterSide, -1);
  for (const auto& z : zones) {
    for (const auto idx : z.member_pixels) label[idx] = z.id;
  }
  for (auto& z : zones) {
    z.detections.clear();
    z.estimated_survivors = 0;
  }
  for (std::size_t d = 0; d < obs.detections.size(); ++d) {
    const Cell c = obs.detections[d].cell;
    const int pr = pixel_of_world_cell(c.row, obs.world_side);
    const int pc = pixel_of_world_cell(c.col, obs.world_side);
    const int z = label[static_cast<std::size_t>(pr) * kRasterSide + pc];
    if (z < 0) continue;
    zones[z].detections.push_back(static_cast<int>(d));
    zones[z].estimated_survivors += obs.detections[d].estimated_survivors;
  }
}

}  // namespace rescue
