// Copyright 2026 The MCOP-Sim Authors
// SPDX-License-Identifier: Apache-2.0

// Platform-independent random numbers. std::*_distribution output is
// implementation-defined, so scenes and noise are drawn from these instead.

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace mcop {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) { return splitmix64(a ^ splitmix64(b)); }

/// Uniform double in [0, 1) from the top 53 bits.
constexpr double to_unit(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

/// Sequential generator for scene layout.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(splitmix64(seed)) {}

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return splitmix64(state_);
  }
  double uniform() { return to_unit(next()); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    if (hi <= lo) return lo;
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(next() % span);
  }

 private:
  std::uint64_t state_;
};

/// Counter-based standard normal keyed by (seed, index, channel): the value
/// depends only on the key, never on evaluation order.
inline double counter_normal(std::uint64_t seed, std::uint64_t index, std::uint64_t channel) {
  const std::uint64_t k = hash_combine(hash_combine(seed, index), channel);
  const double u1 = (static_cast<double>(splitmix64(k) >> 11) + 0.5) * 0x1.0p-53;  // (0,1)
  const double u2 = to_unit(splitmix64(k ^ 0xd1b54a32d192ed03ULL));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Counter-based uniform in [0,1).
inline double counter_uniform(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return to_unit(hash_combine(hash_combine(hash_combine(seed, a), b), c));
}

}  // namespace mcop
