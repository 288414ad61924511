#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "ovepg/errors.hpp"
#include "ovepg/ove.hpp"
#include "support/oracles.hpp"

namespace ovepg {
namespace {

Matrix random_logits(std::mt19937_64& gen, std::size_t n, std::size_t C, double lo = -5.0,
                     double hi = 5.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix f(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(C));
  for (Eigen::Index i = 0; i < f.size(); ++i) f.data()[i] = u(gen);
  return f;
}

OneHotLabels random_labels(std::mt19937_64& gen, std::size_t n, std::size_t C) {
  std::uniform_int_distribution<std::size_t> u(0, C - 1);
  std::vector<std::size_t> idx(n);
  for (auto& i : idx) i = u(gen);
  return OneHotLabels(idx, C);
}

TEST(ATensor, ThreeClassBlocksAsPrinted) {
  // Blocks in the layout of the worked three-class example: block i, row j, column k.
  const std::vector<std::int8_t> expected{
      0, 0, 0,  1, -1, 0,  1, 0, -1,   // block 1
      -1, 1, 0, 0, 0, 0,   0, 1, -1,   // block 2
      -1, 0, 1, 0, -1, 1,  0, 0, 0,    // block 3
  };
  EXPECT_EQ(build_a_tensor(3).values, expected);
}

TEST(ATensor, TwoClassBlocks) {
  const std::vector<std::int8_t> expected{0, 0, 1, -1, -1, 1, 0, 0};
  EXPECT_EQ(build_a_tensor(2).values, expected);
}

TEST(ATensor, ZeroWhenIEqualsJ) {
  const auto a = build_a_tensor(6);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t k = 0; k < 6; ++k) EXPECT_EQ(a(i, i, k), 0);
}

TEST(ATensor, RejectsSingleClass) { EXPECT_THROW(build_a_tensor(1), ParameterError); }

TEST(BuildPsi, WorkedExample) {
  Matrix f(1, 3);
  f << 1, 2, 3;
  const auto psi = build_psi(f);
  const double expected[3][3] = {{0, -1, -2}, {1, 0, -1}, {2, 1, 0}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_EQ(psi(0, i, j), expected[i][j]);
}

TEST(BuildPsi, EqualLogitsGiveZeros) {
  const auto psi = build_psi(Matrix::Constant(4, 5, 2.5));
  for (double v : psi.values()) EXPECT_EQ(v, 0.0);
}

TEST(BuildPsi, MatchesExplicitContractionAndIsAntisymmetric) {
  std::mt19937_64 gen(17);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t C = 2 + trial % 5;
    const Matrix f = random_logits(gen, 3, C);
    const auto psi = build_psi(f);
    const auto oracle = testing::contract_explicit_a(f);
    ASSERT_EQ(psi.size(), oracle.size());
    for (std::size_t e = 0; e < oracle.size(); ++e) EXPECT_NEAR(psi.values()[e], oracle[e], 1e-12);
    for (std::size_t n = 0; n < 3; ++n)
      for (std::size_t i = 0; i < C; ++i)
        for (std::size_t j = 0; j < C; ++j) EXPECT_EQ(psi(n, i, j), -psi(n, j, i));
  }
}

TEST(BuildPsi, RejectsNonFinite) {
  Matrix f(1, 3);
  f << 0, NAN, 1;
  EXPECT_THROW(build_psi(f), InputError);
}

TEST(BuildKappa, FirstClassLabel) {
  const auto kappa = build_kappa(OneHotLabels({0}, 3));
  const double expected[3][3] = {{0, 1, 1}, {-1, 0, 0}, {-1, 0, 0}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_EQ(kappa(0, i, j), expected[i][j]);
}

TEST(BuildKappa, MatchesContractionWithHalfOffsets) {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t C = 2 + trial % 5;
    const auto labels = random_labels(gen, 4, C);
    const Matrix shifted = labels.to_matrix().array() - 0.5;
    const auto oracle = testing::contract_explicit_a(shifted);
    const auto kappa = build_kappa(labels);
    for (std::size_t e = 0; e < oracle.size(); ++e) EXPECT_EQ(kappa.values()[e], oracle[e]);
    for (std::size_t n = 0; n < 4; ++n)
      for (std::size_t i = 0; i < C; ++i) EXPECT_EQ(kappa(n, i, i), 0.0);
  }
}

TEST(BuildKappa, RejectsNonOneHotRows) {
  Matrix y(2, 3);
  y << 1, 0, 0, 1, 1, 0;
  EXPECT_THROW(OneHotLabels::from_matrix(y), InputError);
  y << 1, 0, 0, 0, 0.5, 0;
  EXPECT_THROW(OneHotLabels::from_matrix(y), InputError);
  y << 1, 0, 0, 0, 0, 1;
  EXPECT_EQ(build_kappa(OneHotLabels::from_matrix(y)).samples(), 2u);
}

TEST(OveLogScores, EqualLogitsThreeClasses) {
  const auto scores = ove_log_scores(build_psi(Matrix::Zero(2, 3)));
  for (Eigen::Index i = 0; i < scores.size(); ++i) EXPECT_NEAR(scores.data()[i], -2.0 * std::log(2.0), 1e-15);
}

TEST(OveLogScores, LargeNegativeDifferenceIsStable) {
  Matrix f(1, 2);
  f << -50.0, 0.0;
  const auto scores = ove_log_scores(build_psi(f));
  // log sigma(-50) = -50 - log(1 + e^-50)
  EXPECT_NEAR(scores(0, 0), -50.0, 1e-12);
  EXPECT_NEAR(scores(0, 1), -std::exp(-50.0), 1e-30);
  EXPECT_TRUE(std::isfinite(log_sigmoid(-800.0)));
  EXPECT_EQ(log_sigmoid(-800.0), -800.0);
}

TEST(OveLogScores, DiagonalAddsLogHalfPerClass) {
  std::mt19937_64 gen(3);
  const auto psi = build_psi(random_logits(gen, 5, 4));
  const Matrix diff = ove_log_scores(psi, true) - ove_log_scores(psi, false);
  for (Eigen::Index i = 0; i < diff.size(); ++i) EXPECT_NEAR(diff.data()[i], -std::log(2.0), 1e-14);
}

TEST(OveLogScores, ExpMatchesProbability) {
  std::mt19937_64 gen(4);
  const Matrix f = random_logits(gen, 6, 4, -3.0, 3.0);
  const Matrix scores = ove_log_scores(build_psi(f));
  for (Eigen::Index n = 0; n < f.rows(); ++n) {
    const std::vector<double> row(f.row(n).data(), f.row(n).data() + f.cols());
    for (std::size_t c = 0; c < 4; ++c) {
      EXPECT_NEAR(std::exp(scores(n, static_cast<Eigen::Index>(c))), ove_probability(row, c), 1e-14);
    }
  }
}

TEST(OveProbability, SmallCases) {
  EXPECT_DOUBLE_EQ(ove_probability(std::vector<double>{0.0, 0.0}, 0), 0.5);
  EXPECT_DOUBLE_EQ(ove_probability(std::vector<double>{1.0, 1.0, 1.0}, 2), 0.25);
  const double s2 = 1.0 / (1.0 + std::exp(-2.0));
  EXPECT_NEAR(ove_probability(std::vector<double>{2.0, 0.0}, 0), s2, 1e-15);
  Matrix f(1, 2);
  f << 2.0, 0.0;
  EXPECT_NEAR(softmax_probability(f)(0, 0), s2, 1e-15);
  EXPECT_NEAR(s2, 0.880797, 1e-6);
  EXPECT_THROW(ove_probability(std::vector<double>{0.0, 0.0}, 2), std::out_of_range);
}

TEST(OveProbability, LowerBoundsSoftmax) {
  std::mt19937_64 gen(2024);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t C = 2 + trial % 7;
    const Matrix f = random_logits(gen, 1, C);
    const Matrix soft = softmax_probability(f);
    const std::vector<double> row(f.data(), f.data() + C);
    for (std::size_t c = 0; c < C; ++c) {
      const double ove = ove_probability(row, c);
      EXPECT_LE(ove, soft(0, static_cast<Eigen::Index>(c)) * (1.0 + 1e-15));
      if (C == 2) EXPECT_NEAR(ove, soft(0, static_cast<Eigen::Index>(c)), 1e-12);
    }
  }
}

TEST(Softmax, Basics) {
  Matrix f(2, 3);
  f << 0, 0, 0, 1000, 1000, 1000;
  const Matrix p = softmax_probability(f);
  for (Eigen::Index i = 0; i < p.size(); ++i) EXPECT_NEAR(p.data()[i], 1.0 / 3.0, 1e-15);
  Matrix g(1, 2);
  g << std::log(2.0), 0.0;
  const Matrix q = softmax_probability(g);
  EXPECT_NEAR(q(0, 0), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(q(0, 1), 1.0 / 3.0, 1e-15);
}

TEST(Softmax, ShiftInvariantAndNormalised) {
  std::mt19937_64 gen(8);
  const Matrix f = random_logits(gen, 20, 6);
  const Matrix a = softmax_probability(f);
  const Matrix b = softmax_probability((f.array() + 17.0).matrix());
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-14);
  for (Eigen::Index n = 0; n < a.rows(); ++n) EXPECT_NEAR(a.row(n).sum(), 1.0, 1e-14);
}

TEST(OveLogScores, ArgmaxMatchesLogits) {
  std::mt19937_64 gen(99);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t C = 2 + trial % 7;
    const Matrix f = random_logits(gen, 8, C);
    EXPECT_EQ(argmax_rows(ove_log_scores(build_psi(f))), argmax_rows(f));
  }
}

TEST(Argmax, TiesGoToLowestIndex) {
  Matrix f(2, 3);
  f << 1, 1, 0, 0, 2, 2;
  EXPECT_EQ(argmax_rows(f), (std::vector<std::size_t>{0, 1}));
}

}  // namespace
}  // namespace ovepg
