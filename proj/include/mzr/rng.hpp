#pragma once

#include <cstdint>

// SplitMix64 streams with per-substream derivation from (seed, index).
// The generator is a fixed arithmetic recurrence, so outputs are identical
// across platforms and independent of evaluation order.

namespace mzr {

class SplitMix64 {
public:
  explicit SplitMix64(std::uint64_t seed) : x_(seed) {}

  // Substream for sample `index` of a run seeded with `seed`.
  static SplitMix64 substream(std::uint64_t seed, std::uint64_t index) {
    return SplitMix64(mix(seed) ^ mix(index * 0x9E3779B97F4A7C15ull + 1));
  }

  std::uint64_t next() {
    x_ += 0x9E3779B97F4A7C15ull;
    return mix(x_);
  }

  // Uniform in [0,1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform in [-1,1).
  double uniform_sym() { return 2.0 * uniform01() - 1.0; }

private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t x_;
};

}  // namespace mzr
