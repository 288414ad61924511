#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ovepg/rng.hpp"

namespace ovepg {

/// How the infinite Gamma-sum representation of PG(b, c) is cut off.
struct TruncationPolicy {
  std::size_t num_terms = 200;
  /// Add the expected value of the discarded terms.
  bool tail_correct = true;
};

/// E[omega] for omega ~ PG(b, c): b tanh(c/2) / (2c), with limit b/4 at c = 0.
double pg_mean(double b, double c);

/// Expected contribution of terms k > K of the Gamma sum for PG(b, c),
/// (b / 2 pi^2) sum_{k>K} 1 / ((k - 1/2)^2 + c^2 / (4 pi^2)), evaluated with
/// the midpoint-rule integral approximation.
double pg_tail_mean(double b, double c, std::size_t num_terms);

/// One PG(b, c) draw from the K-term truncated Gamma sum.
double sample_pg_one(double b, double c, const TruncationPolicy& policy, Rng& rng);

/// Independent PG(b, c_i) draws for every entry of c_values. Entry i uses the
/// sub-stream rng.child(i), so results do not depend on evaluation order.
std::vector<double> sample_pg(double b, std::span<const double> c_values,
                              const TruncationPolicy& policy, const RngState& rng);

}  // namespace ovepg
