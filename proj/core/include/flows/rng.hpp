#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace flows {

/// xoshiro256** (Blackman & Vigna), state seeded by four successive outputs
/// of splitmix64 starting from the user seed. Used wherever a seeded stream
/// must be replicable by an independent implementation.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(std::uint64_t seed) noexcept;

  std::uint64_t operator()() noexcept;

  /// Uniform integer in [0, bound) via the multiply-high map
  /// floor(next() * bound / 2^64). bound must be positive.
  std::uint64_t below(std::uint64_t bound) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

 private:
  std::array<std::uint64_t, 4> s_{};
};

}  // namespace flows
