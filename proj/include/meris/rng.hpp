#pragma once

#include "meris/types.hpp"

#include <cmath>
#include <cstdint>
#include <random>

namespace meris {

// Deterministic random stream. Uniform/normal draws are generated from raw
// mt19937_64 output rather than std::*_distribution so that realizations are
// identical across standard library implementations.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  // Substream derivation for per-trial parallelism (splitmix64 mixing of the
  // base seed and the stream index; independent of draw position).
  Rng derive(std::uint64_t stream) const {
    std::uint64_t z = seed_ + (stream + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return Rng(z ^ (z >> 31));
  }

  // Uniform on [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller.
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
  }

  // Circularly symmetric complex Gaussian with total variance `var`.
  Complex cnormal(double var) {
    const double s = std::sqrt(var / 2.0);
    return Complex(s * normal(), s * normal());
  }

private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

} // namespace meris
