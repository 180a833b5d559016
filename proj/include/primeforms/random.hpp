#pragma once

#include <cstdint>

namespace primeforms {

/// Counter-based generator: the i-th draw of stream `seed` is a pure
/// function of (seed, i), so work can be split across workers without
/// changing the sample sequence.
class CounterRng {
public:
  explicit CounterRng(uint64_t seed, uint64_t counter = 0) : seed_(seed), counter_(counter) {}

  uint64_t next_u64() { return mix(seed_ * 0x9E3779B97F4A7C15ULL + (counter_++) * 0xD1B54A32D192ED03ULL); }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_unit() { return static_cast<double>(next_u64() >> 11U) * 0x1.0p-53; }

  /// Uniform double in [-1, 1).
  double next_signed() { return 2.0 * next_unit() - 1.0; }

  [[nodiscard]] uint64_t counter() const { return counter_; }

private:
  static uint64_t mix(uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30U)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27U)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31U);
  }

  uint64_t seed_;
  uint64_t counter_;
};

}  // namespace primeforms
