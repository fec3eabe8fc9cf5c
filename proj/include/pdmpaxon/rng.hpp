// Copyright 2026 pdmp-axon developers.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace pdmpaxon {

/// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed of ensemble member `index` under master seed `master`:
///   splitmix64(master ^ splitmix64(index))
/// Counter-based, so a member's stream does not depend on how many other
/// members exist or in which order they run.
constexpr std::uint64_t member_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return splitmix64(master ^ splitmix64(index));
}

/// Random source for the simulators. Only the raw 64-bit output of
/// std::mt19937_64 is used (fully specified by the standard); the
/// floating-point transforms are done here so streams are portable.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Unit-rate exponential, strictly positive.
  double exponential() { return -std::log1p(-uniform()); }

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
};

}  // namespace pdmpaxon
