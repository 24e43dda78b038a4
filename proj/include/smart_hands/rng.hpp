#pragma once

#include <cstdint>

namespace smart_hands {

/**
 * SplitMix64 — the seeded generator behind every synthetic stream.
 *
 * The algorithm is pinned here so runs can be reproduced outside this
 * codebase. State update and output mix per step:
 *
 *   state += 0x9E3779B97F4A7C15
 *   z = state
 *   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
 *   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
 *   return z ^ (z >> 31)
 *
 * Derived draws, in terms of next():
 *   next_double()        = (next() >> 11) * 2^-53, uniform in [0, 1)
 *   next_below(n)        = next() % n   (modulo; n is always tiny here)
 *   uniform_int(lo, hi)  = lo + next_below(hi - lo + 1), inclusive bounds
 *   bernoulli(p)         = next_double() < p
 */
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed = 1) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  double next_double() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  std::uint64_t next_below(std::uint64_t n) { return next() % n; }

  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(
                    next_below(static_cast<std::uint64_t>(hi - lo + 1)));
  }

  bool bernoulli(double p) { return next_double() < p; }

 private:
  std::uint64_t state_;
};

}  // namespace smart_hands
