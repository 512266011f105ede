#pragma once

#include <cstdint>
#include <random>

namespace rescue {

using Rng = std::mt19937_64;

// Independent named streams derived from one seed.
enum class Stream : std::uint32_t {
  scenario = 1,
  hazard = 2,
  perception = 3,
  optimizer = 4,
};

inline Rng make_rng(std::uint64_t seed, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    stream, 0x9e3779b9u};
  return Rng(seq);
}

inline Rng make_rng(std::uint64_t seed, Stream stream) {
  return make_rng(seed, static_cast<std::uint32_t>(stream));
}

/// Uniform on [0, 1) from the top 53 bits of one draw.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace rescue
