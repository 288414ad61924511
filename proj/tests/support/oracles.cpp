#include "support/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace ovepg::testing {

double pg_mean_from_laplace(double b, double c) {
  // cosh(sqrt(s)) continued to s < 0 as cos(sqrt(-s)).
  auto cosh_sqrt = [](double s) { return s >= 0.0 ? std::cosh(std::sqrt(s)) : std::cos(std::sqrt(-s)); };
  auto laplace = [&](double t) {
    return std::pow(std::cosh(c / 2.0) / cosh_sqrt(t / 2.0 + c * c / 4.0), b);
  };
  const double h = 1e-5;
  return -(laplace(h) - laplace(-h)) / (2.0 * h);
}

double pg_mean_brute_force(double b, double c, std::size_t draws, std::size_t terms,
                           std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::gamma_distribution<double> gamma(b, 1.0);
  const double pi2 = std::numbers::pi * std::numbers::pi;
  double total = 0.0;
  for (std::size_t d = 0; d < draws; ++d) {
    double s = 0.0;
    for (std::size_t k = 1; k <= terms; ++k) {
      const double h = static_cast<double>(k) - 0.5;
      s += gamma(gen) / (h * h + c * c / (4.0 * pi2));
    }
    total += s / (2.0 * pi2);
  }
  return total / static_cast<double>(draws);
}

std::vector<double> contract_explicit_a(const Matrix& v) {
  const auto n = static_cast<std::size_t>(v.rows());
  const auto C = static_cast<std::size_t>(v.cols());
  std::vector<int> a(C * C * C);
  for (std::size_t i = 0; i < C; ++i)
    for (std::size_t j = 0; j < C; ++j)
      for (std::size_t k = 0; k < C; ++k)
        a[(i * C + j) * C + k] = (i == k ? 1 : 0) - (j == k ? 1 : 0);
  std::vector<double> out(n * C * C, 0.0);
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t i = 0; i < C; ++i)
      for (std::size_t j = 0; j < C; ++j) {
        double acc = 0.0;
        for (std::size_t k = 0; k < C; ++k)
          acc += a[(i * C + j) * C + k] * v(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(k));
        out[(s * C + i) * C + j] = acc;
      }
  return out;
}

Matrix finite_difference(const std::function<double(const Matrix&)>& f, const Matrix& x, double h) {
  Matrix g(x.rows(), x.cols());
  Matrix probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double orig = probe.data()[i];
    probe.data()[i] = orig + h;
    const double up = f(probe);
    probe.data()[i] = orig - h;
    const double down = f(probe);
    probe.data()[i] = orig;
    g.data()[i] = (up - down) / (2.0 * h);
  }
  return g;
}

std::vector<double> finite_difference(const std::function<double(const std::vector<double>&)>& f,
                                      const std::vector<double>& x, double h) {
  std::vector<double> g(x.size());
  std::vector<double> probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + h;
    const double up = f(probe);
    probe[i] = orig - h;
    const double down = f(probe);
    probe[i] = orig;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

double max_relative_error(const double* a, const double* b, std::size_t n, double floor) {
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double scale = std::max({std::abs(a[i]), std::abs(b[i]), floor});
    worst = std::max(worst, std::abs(a[i] - b[i]) / scale);
  }
  return worst;
}

}  // namespace ovepg::testing
