#pragma once

#include <cstdint>

namespace ta {

/// 64-bit linear congruential generator used for every seeded draw in the
/// project (subtask selection, Gibbs sampling, fixture generation).
///
///   state' = state * 6364136223846793005 + 1442695040888963407  (mod 2^64)
///
/// Outputs are taken from the high bits only. The sequence is fully defined
/// by the seed and identical on every platform; see docs/rng.md.
class Lcg64 {
 public:
  static constexpr std::uint64_t kMultiplier = 6364136223846793005ULL;
  static constexpr std::uint64_t kIncrement = 1442695040888963407ULL;

  explicit constexpr Lcg64(std::uint64_t seed) noexcept : state_(seed ^ 0x9E3779B97F4A7C15ULL) {
    next();
  }

  constexpr std::uint64_t next() noexcept {
    state_ = state_ * kMultiplier + kIncrement;
    return state_;
  }

  /// Uniform double in [0, 1) with 53 bits of resolution.
  constexpr double uniform() noexcept {
    return static_cast<double>(next() >> 11) * (1.0 / 9007199254740992.0);
  }

  /// Uniform integer in [0, n); n must be positive.
  constexpr std::uint64_t below(std::uint64_t n) noexcept {
    // Multiply-shift on the high 32 bits; requires n < 2^32.
    const std::uint64_t hi = next() >> 32;
    return (hi * n) >> 32;
  }

  constexpr double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  constexpr std::uint64_t state() const noexcept { return state_; }

 private:
  std::uint64_t state_;
};

}  // namespace ta
