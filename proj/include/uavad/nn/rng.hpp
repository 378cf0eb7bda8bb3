#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <utility>

namespace uavad::nn {

/// xoshiro256** generator seeded through SplitMix64.
///
/// Every draw is defined with integer arithmetic and IEEE-754 double
/// operations only, so a given seed produces the same sequence on every
/// platform. Gaussian draws use the Box-Muller transform (cosine branch),
/// which additionally depends on the C library's log/cos/sqrt.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();
  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal draw: sqrt(-2 ln(1 - u1)) * cos(2 pi u2).
  double gaussian();
  /// Uniform integer in [lo, hi] (inclusive), unbiased by rejection.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  /// Independent generator derived from this one's next output.
  Rng split();

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::array<std::uint64_t, 4> s_{};
};

}  // namespace uavad::nn
