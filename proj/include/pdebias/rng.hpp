#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace pdebias {

/// Counter-style splitmix64 stream. The generator is pinned so that sample
/// draws and network initializations can be reproduced bit-for-bit from a
/// seed in any language:
///
///   state   <- seed
///   advance: state += 0x9E3779B97F4A7C15
///            z = state
///            z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///            z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///            output z ^ (z >> 31)
///
///   uniform01: top 53 bits of the output, scaled by 2^-53     (in [0, 1))
///   normal:    Box-Muller, two uniforms u1, u2 per draw,
///              sqrt(-2 log(1 - u1)) * cos(2 pi u2)
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform01();
  }

  double normal() {
    const double u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log1p(-u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  double normal(double stddev) { return stddev * normal(); }

 private:
  std::uint64_t state_;
};

}  // namespace pdebias
