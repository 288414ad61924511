#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "ovepg/errors.hpp"
#include "ovepg/pg.hpp"
#include "support/oracles.hpp"

namespace ovepg {
namespace {

double sample_mean(double b, double c, std::size_t draws, TruncationPolicy policy = {},
                   std::uint64_t seed = 11) {
  std::vector<double> cs(draws, c);
  const auto w = sample_pg(b, cs, policy, RngState{seed, 0});
  return std::accumulate(w.begin(), w.end(), 0.0) / static_cast<double>(draws);
}

TEST(PgMean, FrozenValues) {
  // Values from the Laplace-transform oracle, cross-checked by brute force below.
  EXPECT_NEAR(pg_mean(1.0, 0.0), 0.25, 1e-15);
  EXPECT_NEAR(pg_mean(1.0, 2.0), 0.190399, 1e-6);
  EXPECT_NEAR(pg_mean(2.0, 1.0), 0.462117, 1e-6);
  EXPECT_NEAR(pg_mean(1.0, 1.0), 0.231059, 1e-6);
}

TEST(PgMean, MatchesLaplaceTransformOracle) {
  for (double b : {0.5, 1.0, 2.0, 3.5}) {
    for (double c : {0.0, 1e-6, 0.1, 0.5, 1.0, 2.0, 4.0, -3.0}) {
      EXPECT_NEAR(pg_mean(b, c), testing::pg_mean_from_laplace(b, c), 1e-7) << b << " " << c;
    }
  }
}

TEST(PgMean, ContinuousAtZero) {
  EXPECT_NEAR(pg_mean(1.0, 1e-6), 0.25, 1e-12);
  EXPECT_NEAR(pg_mean(1.0, 1.1e-4), pg_mean(1.0, 0.9e-4), 1e-9);
}

TEST(PgMean, BruteForceGammaSumAgrees) {
  const double oracle = testing::pg_mean_brute_force(1.0, 2.0, 4000, 2000, 5);
  EXPECT_NEAR(oracle, pg_mean(1.0, 2.0), 0.02 * pg_mean(1.0, 2.0));
  EXPECT_NEAR(testing::pg_mean_brute_force(1.0, 1e-6, 4000, 2000, 6), 0.25, 0.02 * 0.25);
}

TEST(PgMean, RejectsNonPositiveShape) {
  EXPECT_THROW(pg_mean(0.0, 1.0), ParameterError);
  EXPECT_THROW(pg_mean(-1.0, 1.0), ParameterError);
}

TEST(PgMean, StrictlyDecreasingInAbsTilt) {
  double prev = pg_mean(1.0, 0.0);
  for (double c = 0.25; c <= 8.0; c += 0.25) {
    const double cur = pg_mean(1.0, c);
    EXPECT_LT(cur, prev);
    EXPECT_DOUBLE_EQ(cur, pg_mean(1.0, -c));
    prev = cur;
  }
}

TEST(SamplePg, MomentMatchAtUnitTilt) {
  EXPECT_NEAR(sample_mean(1.0, 1.0, 200000), 0.231059, 0.01 * 0.231059);
}

TEST(SamplePg, MomentMatchAtZeroTilt) {
  EXPECT_NEAR(sample_mean(1.0, 0.0, 200000), 0.25, 0.01 * 0.25);
}

TEST(SamplePg, DeterministicForSameState) {
  const std::vector<double> cs{0.0, 1.0, -2.0, 3.5};
  const auto a = sample_pg(1.0, cs, {}, RngState{42, 7});
  const auto b = sample_pg(1.0, cs, {}, RngState{42, 7});
  const auto c = sample_pg(1.0, cs, {}, RngState{42, 8});
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
}

TEST(SamplePg, StrictlyPositive) {
  std::vector<double> cs(5000);
  for (std::size_t i = 0; i < cs.size(); ++i) cs[i] = -20.0 + 40.0 * static_cast<double>(i) / 5000.0;
  for (double w : sample_pg(1.0, cs, {}, RngState{3, 0})) EXPECT_GT(w, 0.0);
  for (double w : sample_pg(0.3, cs, {5, false}, RngState{3, 1})) EXPECT_GT(w, 0.0);
}

TEST(SamplePg, SymmetricInTilt) {
  const std::size_t draws = 100000;
  const double plus = sample_mean(1.0, 2.0, draws, {}, 1);
  const double minus = sample_mean(1.0, -2.0, draws, {}, 2);
  // PG(1, 2) variance is below 0.03, so 3 standard errors of the difference
  // stay under 0.0025.
  EXPECT_NEAR(plus, minus, 0.0025);
}

TEST(SamplePg, SampledMeansDecreaseWithTilt) {
  const std::size_t draws = 100000;
  double prev = sample_mean(1.0, 0.0, draws);
  for (double c : {1.0, 2.0, 4.0}) {
    const double cur = sample_mean(1.0, c, draws);
    EXPECT_LT(cur, prev);
    prev = cur;
  }
}

TEST(SamplePg, TruncationConsistency) {
  for (double c : {0.0, 1.0, 2.5, 4.0}) {
    const double k200 = sample_mean(1.0, c, 40000, {200, true}, 9);
    const double k2000 = sample_mean(1.0, c, 40000, {2000, true}, 9);
    EXPECT_LT(std::abs(k2000 - k200) / k2000, 0.002) << c;
  }
}

TEST(SamplePg, TailCorrectionRemovesTruncationBias) {
  // With only 5 terms the raw sum drops about 4% of the mean; the tail
  // correction restores it.
  const double raw = sample_mean(1.0, 1.0, 100000, {5, false});
  const double corrected = sample_mean(1.0, 1.0, 100000, {5, true});
  EXPECT_LT(raw, 0.97 * pg_mean(1.0, 1.0));
  EXPECT_NEAR(corrected, pg_mean(1.0, 1.0), 0.01 * pg_mean(1.0, 1.0));
}

TEST(SamplePg, TailMeanMatchesDirectSum) {
  const double pi2 = M_PI * M_PI;
  for (double c : {0.0, 1.0, 10.0}) {
    double direct = 0.0;
    for (int k = 201; k < 2000000; ++k) {
      const double h = k - 0.5;
      direct += 1.0 / (h * h + c * c / (4.0 * pi2));
    }
    direct /= 2.0 * pi2;
    // The direct sum stops at 2e6 terms and misses about 2.5e-8 of the tail.
    EXPECT_NEAR(pg_tail_mean(1.0, c, 200), direct, 2e-4 * direct);
  }
}

TEST(SamplePg, ParameterErrors) {
  const std::vector<double> cs{1.0};
  EXPECT_THROW(sample_pg(0.0, cs, {}, {}), ParameterError);
  EXPECT_THROW(sample_pg(1.0, cs, {0, true}, {}), ParameterError);
}

TEST(Rng, GammaMomentsNonIntegerShape) {
  Rng rng(RngState{5, 5});
  for (double shape : {0.4, 2.5, 10.0}) {
    double sum = 0.0, sq = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
      const double g = rng.gamma(shape);
      sum += g;
      sq += g * g;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    EXPECT_NEAR(mean, shape, 4.0 * std::sqrt(shape / n)) << shape;
    EXPECT_NEAR(var, shape, 0.03 * shape + 0.01) << shape;
  }
}

TEST(Rng, ChildStreamsDiffer) {
  const RngState root{1, 0};
  EXPECT_NE(root.child(0), root.child(1));
  EXPECT_EQ(root.child(3), root.child(3));
  Rng a(root.child(0)), b(root.child(1));
  EXPECT_NE(a(), b());
}

}  // namespace
}  // namespace ovepg
