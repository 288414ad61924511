#include "ovepg/pg.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "ovepg/errors.hpp"

namespace ovepg {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPiSq = 2.0 * kPi * kPi;
constexpr double kFourPiSq = 4.0 * kPi * kPi;

void check_shape(double b) {
  if (!(b > 0.0) || !std::isfinite(b)) {
    throw ParameterError("PG shape b must be positive and finite, got " + std::to_string(b));
  }
}

void check_policy(const TruncationPolicy& policy) {
  if (policy.num_terms < 1) throw ParameterError("PG truncation needs at least one term");
}

}  // namespace

double pg_mean(double b, double c) {
  check_shape(b);
  if (!std::isfinite(c)) throw ParameterError("PG tilt c must be finite");
  const double a = std::abs(c);
  if (a < 1e-4) {
    // tanh(x)/x = 1 - x^2/3 + ..., x = c/2
    return 0.25 * b * (1.0 - a * a / 12.0);
  }
  return b * std::tanh(0.5 * a) / (2.0 * a);
}

double pg_tail_mean(double b, double c, std::size_t num_terms) {
  const double a = std::abs(c) / (2.0 * kPi);
  const double K = static_cast<double>(num_terms);
  // sum_{k>K} g(k - 1/2) ~ integral_K^inf dx / (x^2 + a^2)
  const double tail = a < 1e-12 ? 1.0 / K : (0.5 * kPi - std::atan(K / a)) / a;
  return b * tail / kTwoPiSq;
}

double sample_pg_one(double b, double c, const TruncationPolicy& policy, Rng& rng) {
  const double shift = c * c / kFourPiSq;
  double sum = 0.0;
  for (std::size_t k = 1; k <= policy.num_terms; ++k) {
    const double h = static_cast<double>(k) - 0.5;
    sum += rng.gamma(b) / (h * h + shift);
  }
  double omega = sum / kTwoPiSq;
  if (policy.tail_correct) omega += pg_tail_mean(b, c, policy.num_terms);
  return omega;
}

std::vector<double> sample_pg(double b, std::span<const double> c_values,
                              const TruncationPolicy& policy, const RngState& rng) {
  check_shape(b);
  check_policy(policy);
  std::vector<double> out(c_values.size());
  for (std::size_t i = 0; i < c_values.size(); ++i) {
    if (!std::isfinite(c_values[i])) throw ParameterError("PG tilt c must be finite");
    Rng entry(rng.child(i));
    out[i] = sample_pg_one(b, c_values[i], policy, entry);
  }
  return out;
}

}  // namespace ovepg
