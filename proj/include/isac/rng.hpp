#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "isac/types.hpp"

namespace isac {

// Deterministic random stream. Distributions are hand-rolled on top of
// mt19937_64 so a given seed produces the same draw sequence everywhere
// (std::normal_distribution et al. are implementation-defined).
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on (0, 1]; never 0, so log() is safe.
  double uniform01() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  // Uniform index in [0, bound); bound must be a power of two.
  std::uint64_t index_pow2(std::uint64_t bound) {
    return next_u64() & (bound - 1);
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform01()));
    const double t = 2.0 * std::numbers::pi * uniform01();
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return r * std::cos(t);
  }

  // Circularly symmetric complex Gaussian, E|z|^2 = variance.
  Complex complex_normal(double variance) {
    const double s = std::sqrt(0.5 * variance);
    const double re = s * normal();
    const double im = s * normal();
    return {re, im};
  }

  double phase() { return 2.0 * std::numbers::pi * uniform01(); }

  double exponential(double mean) { return -mean * std::log(uniform01()); }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// splitmix64 finalizer; good avalanche for seed derivation.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Stream for (master seed, purpose, index). Trials derive their streams from
// the master seed this way, so parallel and serial runs agree exactly.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t purpose,
                                 std::uint64_t index) {
  return mix64(mix64(mix64(master) ^ purpose) ^ index);
}

inline RandomStream derive_stream(std::uint64_t master, std::uint64_t purpose,
                                  std::uint64_t index) {
  return RandomStream(derive_seed(master, purpose, index));
}

}  // namespace isac
