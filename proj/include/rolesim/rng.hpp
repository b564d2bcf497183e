#pragma once

#include <cstdint>
#include <random>

namespace rolesim {

/// Seedable random source. The transforms from raw 64-bit draws are written
/// out here rather than using <random> distributions, whose output is
/// implementation-defined, so that a seed reproduces the same stream on any
/// standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform double in [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Exponential variate with the given rate (mean 1/rate).
  double exponential(double rate);

  bool bernoulli(double p) { return uniform() < p; }

  /// Unbiased integer in [0, n). n must be positive.
  std::size_t index(std::size_t n);

 private:
  std::mt19937_64 engine_;
};

/// SplitMix64 finalizer; a bijective 64-bit mixer.
std::uint64_t mix64(std::uint64_t x);

/// Seed for an independent replica, a pure function of the master seed and
/// the replica coordinates. Used by sweeps and EGTA so results never depend on
/// scheduling order.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0,
                          std::uint64_t c = 0);

}  // namespace rolesim
