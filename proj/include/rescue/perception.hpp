#pragma once

#include "rescue/dynamics.hpp"
#include "rescue/grid.hpp"
#include "rescue/rng.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <vector>

namespace rescue {

inline constexpr int kRasterSide = 256;

struct SensorParams {
  double hazard_noise_sigma = 0.05;
  double survivor_recall = 0.9;
  double false_positive_rate = 1e-4;  // per raster pixel
  double survivor_footprint_cells = 2.0;  // Gaussian spread of each sighting in the density channel

  void validate() const;  // throws ConfigError
};

/// A survivor sighting in world coordinates. Phantom detections are
/// indistinguishable from real ones downstream.
struct Detection {
  Cell cell;
  int estimated_survivors = 0;
};

struct Observation {
  int tick = 0;
  int world_side = 0;
  GridD hazard;          // kRasterSide x kRasterSide
  GridD survivors;       // detected survivor density
  GridD infrastructure;  // road network
  Eigen::VectorXd sensor_readings;  // mean hazard per sensor region, row-major 4x4 blocks
  std::vector<Detection> detections;
};

struct KernelParams {
  int width = 5;
  double hazard_weight = 0.5;
  double survivor_weight = 0.4;
  double infrastructure_weight = 0.1;
};

struct PriorityMap {
  GridD values;  // [0, 1]
};

struct Zone {
  int id = 0;
  std::vector<Eigen::Index> member_pixels;  // linear raster indices, ascending
  Cell centroid;                            // world cell of the member pixel nearest the mean position
  double centroid_row = 0.0;                // raster coordinates of the mean position
  double centroid_col = 0.0;
  double severity = 0.0;
  int estimated_survivors = 0;
  std::vector<int> detections;  // indices into Observation::detections
};

// Raster <-> world mapping (square grids)

inline double world_coordinate(int pixel, int world_side, int raster_side = kRasterSide) {
  return (pixel + 0.5) * world_side / raster_side - 0.5;
}

inline int world_cell_of_pixel(int pixel, int world_side, int raster_side = kRasterSide) {
  return std::clamp(static_cast<int>((pixel + 0.5) * world_side / raster_side), 0, world_side - 1);
}

inline int pixel_of_world_cell(int cell, int world_side, int raster_side = kRasterSide) {
  return std::clamp(static_cast<int>((cell + 0.5) * raster_side / world_side), 0, raster_side - 1);
}

/// Bilinear resampling of a square grid, sampling at pixel centres.
template <typename Derived>
Grid<typename Derived::Scalar> resample_bilinear(const Eigen::ArrayBase<Derived>& src, int out_side) {
  using Scalar = typename Derived::Scalar;
  const int n = static_cast<int>(src.rows());
  Grid<Scalar> out(out_side, out_side);
  std::vector<int> lo(out_side), hi(out_side);
  std::vector<Scalar> frac(out_side);
  for (int p = 0; p < out_side; ++p) {
    const double u = std::clamp(world_coordinate(p, n, out_side), 0.0, n - 1.0);
    lo[p] = static_cast<int>(std::floor(u));
    hi[p] = std::min(lo[p] + 1, n - 1);
    frac[p] = static_cast<Scalar>(u - lo[p]);
  }
  for (int r = 0; r < out_side; ++r) {
    for (int c = 0; c < out_side; ++c) {
      const Scalar top = src(lo[r], lo[c]) * (1 - frac[c]) + src(lo[r], hi[c]) * frac[c];
      const Scalar bottom = src(hi[r], lo[c]) * (1 - frac[c]) + src(hi[r], hi[c]) * frac[c];
      out(r, c) = top * (1 - frac[r]) + bottom * frac[r];
    }
  }
  return out;
}

/// Boolean resampling: a pixel is set if any world cell it overlaps is set.
GridB resample_maxpool(const GridB& src, int out_side);

/// Normalized binomial smoothing kernel (discrete Gaussian) of odd width.
template <typename Scalar = double>
Eigen::Array<Scalar, Eigen::Dynamic, 1> smoothing_kernel(int width) {
  const int w = std::max(1, width | 1);
  Eigen::Array<Scalar, Eigen::Dynamic, 1> k(w);
  k(0) = 1;
  for (int i = 1; i < w; ++i) k(i) = k(i - 1) * (w - i) / i;
  return k / k.sum();
}

/// Sampled Gaussian of standard deviation `sigma`, truncated at 3 sigma, normalized.
template <typename Scalar = double>
Eigen::Array<Scalar, Eigen::Dynamic, 1> gaussian_kernel(double sigma) {
  const int radius = sigma > 0.0 ? static_cast<int>(std::ceil(3.0 * sigma)) : 0;
  Eigen::Array<Scalar, Eigen::Dynamic, 1> k(2 * radius + 1);
  for (int i = -radius; i <= radius; ++i) {
    k(i + radius) = radius == 0 ? Scalar(1) : static_cast<Scalar>(std::exp(-0.5 * i * i / (sigma * sigma)));
  }
  return k / k.sum();
}

/// Separable convolution with border renormalization, so constant fields are preserved.
template <typename Derived>
Grid<typename Derived::Scalar> convolve_separable(const Eigen::ArrayBase<Derived>& src,
                                                  const Eigen::Array<typename Derived::Scalar, Eigen::Dynamic, 1>& kernel) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index rows = src.rows();
  const Eigen::Index cols = src.cols();
  const Eigen::Index radius = kernel.size() / 2;

  auto pass = [&](const Grid<Scalar>& in, bool horizontal) {
    Grid<Scalar> out(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) {
        Scalar acc = 0, mass = 0;
        for (Eigen::Index k = -radius; k <= radius; ++k) {
          const Eigen::Index rr = horizontal ? r : r + k;
          const Eigen::Index cc = horizontal ? c + k : c;
          if (rr < 0 || cc < 0 || rr >= rows || cc >= cols) continue;
          const Scalar weight = kernel(k + radius);
          acc += weight * in(rr, cc);
          mass += weight;
        }
        out(r, c) = acc / mass;
      }
    }
    return out;
  };
  return pass(pass(src.derived(), true), false);
}

/// Min-max scaling to [0, 1]; constant inputs map to all zeros.
template <typename Derived>
Grid<typename Derived::Scalar> min_max_normalize(const Eigen::ArrayBase<Derived>& src) {
  using Scalar = typename Derived::Scalar;
  const Scalar lo = src.minCoeff();
  const Scalar hi = src.maxCoeff();
  if (!(hi > lo)) return Grid<Scalar>::Zero(src.rows(), src.cols());
  return ((src - lo) / (hi - lo)).max(Scalar(0)).min(Scalar(1));
}

/// Noisy raster snapshot of the world. `pending` flags the survivor groups that
/// are still awaiting rescue; only those can be detected.
Observation observe(const WorldState& world, const std::vector<bool>& pending, const SensorParams& params,
                    Rng& rng);

/// All groups pending.
Observation observe(const WorldState& world, const SensorParams& params, Rng& rng);

PriorityMap extract_priority_map(const Observation& obs, const KernelParams& kernel);

/// 8-connected components of pixels strictly above `threshold`, strongest
/// `max_zones` by severity, sorted by descending severity.
std::vector<Zone> segment_zones(const PriorityMap& map, double threshold, int max_zones, int world_side);

/// Fills Zone::detections and Zone::estimated_survivors from detection pixels.
void attach_detections(std::vector<Zone>& zones, const Observation& obs);

}  // namespace rescue
