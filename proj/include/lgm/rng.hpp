#pragma once

#include <cstdint>

namespace lgm {

/// Seedable splittable generator: SplitMix64 streams (Steele, Lea & Flood 2014)
/// with normal variates via the inverse-CDF method (AS 241). Every draw is a
/// pure function of (seed, position), so replications are reproducible across
/// platforms and independent of scheduling.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform draw strictly inside (0, 1): (n + 1/2) / 2^53 on the 53-bit lattice.
  double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  double normal();

  /// Independent stream derived from the original seed; fork(k) is stable under
  /// any interleaving of draws on the parent.
  Rng fork(std::uint64_t stream) const {
    Rng r(seed_ ^ (0xD1B54A32D192ED03ull * (stream + 1)));
    r.next_u64();
    return r;
  }

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
};

}  // namespace lgm
