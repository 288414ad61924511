#pragma once

#include <cstdint>
#include <limits>

namespace ovepg {

/// Seed plus stream counter. Sub-streams are derived deterministically with
/// child(), so per-chain and per-entry generators can be reconstructed from a
/// single user seed without sharing mutable state.
struct RngState {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  RngState child(std::uint64_t index) const noexcept;

  friend bool operator==(const RngState&, const RngState&) = default;
};

/// xoshiro256** engine seeded from an RngState through splitmix64.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(RngState state) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept;

  /// Uniform on the open interval (0, 1).
  double uniform() noexcept;
  double normal() noexcept;
  /// Gamma(shape, 1). Exponential sums for small integer shapes,
  /// Marsaglia-Tsang otherwise (with the U^(1/a) boost below shape 1).
  double gamma(double shape) noexcept;
  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound) noexcept;

 private:
  std::uint64_t s_[4];
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t& state) noexcept;

}  // namespace ovepg
