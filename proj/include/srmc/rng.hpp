#pragma once

#include <cstdint>
#include <random>

#include "srmc/common.hpp"

namespace srmc {

/// Seeded random stream with fully specified draw layout.
///
/// All variates are produced from raw mt19937_64 output with explicit
/// arithmetic (no std::*_distribution), so a given seed yields the same
/// sequence on every platform and the consumption pattern per draw is
/// fixed: uniform() consumes one engine output, normal() consumes two.
/// That makes shared-randomness comparisons between kernels exact.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform double in [0, 1) with 53-bit resolution.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; two uniforms per call, no caching.
  double normal() {
    double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  Vec normal_vec(int d) {
    Vec z(d);
    for (int i = 0; i < d; ++i) z[i] = normal();
    return z;
  }

  /// Uniform integer in {0, ..., n-1}, unbiased.
  std::int64_t uniform_int(std::int64_t n) {
    const std::uint64_t un = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % un;
    std::uint64_t v;
    do {
      v = engine_();
    } while (v >= limit);
    return static_cast<std::int64_t>(v % un);
  }

  /// Per-chain stream seed: base seed XOR chain index.
  static std::uint64_t chain_seed(std::uint64_t base, unsigned chain) {
    return base ^ static_cast<std::uint64_t>(chain);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace srmc
