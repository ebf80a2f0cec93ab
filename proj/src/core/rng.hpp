// Copyright (c) 2026 Clarinet Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>

namespace clar {

// Counter-based generator (splitmix64 finalizer over seed + counter). The
// k-th draw is a pure function of (seed, k), so any stream can be replayed
// or split without shared mutable state.
class Rng {
 public:
  explicit Rng(uint64_t seed = 0) : seed_(seed) {}

  static uint64_t mix(uint64_t seed, uint64_t ctr) {
    uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (ctr + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  uint64_t next_u64() { return mix(seed_, counter_++); }

  // uniform in [0, 1) with 53-bit resolution
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // standard normal, Box-Muller with a cached spare
  double gauss() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // independent child stream; deterministic in (seed, tag)
  Rng split(uint64_t tag) const { return Rng(mix(seed_, 0x5851f42d4c957f2dULL ^ tag)); }

 private:
  uint64_t seed_;
  uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace clar
