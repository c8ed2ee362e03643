#pragma once

#include <cmath>
#include <cstdint>

namespace bnmc {

// Counter-based random stream: every output is a pure function of
// (key, counter). Streams keyed by distinct id tuples are independent, so
// parallel draws do not depend on scheduling order and any draw can be
// replayed from its coordinates.
struct RngStream {
  std::uint64_t key = 0;
  std::uint64_t counter = 0;

  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

  // splitmix64 finalizer (Stafford variant 13); a 64-bit bijection.
  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Folds one id component into a key. The multiply-add chain keeps distinct
  // component tuples on distinct keys.
  static constexpr std::uint64_t fold(std::uint64_t k, std::uint64_t v) {
    return mix(k * kGolden + v + 0x632BE59BD9B4E019ull);
  }

  static RngStream keyed(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0,
                         std::uint64_t c = 0, std::uint64_t d = 0) {
    return RngStream{fold(fold(fold(fold(fold(1, seed), a), b), c), d), 0};
  }

  RngStream derive(std::uint64_t a, std::uint64_t b = 0) const {
    return RngStream{fold(fold(key, a), b), 0};
  }

  std::uint64_t next_u64() { return mix(key + kGolden * ++counter); }

  // Uniform on the open interval (0,1); endpoints are unreachable.
  double next_unit() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53; }

  // Standard normal via Box-Muller; consumes exactly two counters.
  double next_gaussian() {
    const double u1 = next_unit();
    const double u2 = next_unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.28318530717958647692529 * u2);
  }
};

}  // namespace bnmc
