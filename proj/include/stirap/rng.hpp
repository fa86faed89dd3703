#pragma once

// Explicit stream derivation and distribution transforms, so sampled values
// do not depend on the standard library's distribution implementations.

#include <cmath>
#include <cstdint>
#include <random>

#include "stirap/common.hpp"

namespace stirap {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

enum class Stream : std::uint64_t { jumps = 1, noise = 2 };

/// Generator for (seed, stream, index).
inline std::mt19937_64 make_rng(std::uint64_t seed, Stream stream, std::uint64_t index) {
  std::uint64_t s = splitmix64(seed);
  s = splitmix64(s ^ (static_cast<std::uint64_t>(stream) * 0xD1B54A32D192ED03ULL));
  s = splitmix64(s ^ index);
  return std::mt19937_64(s);
}

/// Uniform variate in the open interval (0, 1).
inline double uniform_open(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal variate (Box-Muller, one value per call).
inline double standard_normal(std::mt19937_64& rng) {
  const double u1 = uniform_open(rng);
  const double u2 = uniform_open(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

}  // namespace stirap
