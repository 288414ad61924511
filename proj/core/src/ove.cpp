#include "ovepg/ove.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "ovepg/errors.hpp"

namespace ovepg {

ATensor build_a_tensor(std::size_t classes) {
  if (classes < 2) throw ParameterError("A tensor needs at least two classes");
  ATensor a{classes, std::vector<std::int8_t>(classes * classes * classes, 0)};
  for (std::size_t i = 0; i < classes; ++i) {
    for (std::size_t j = 0; j < classes; ++j) {
      for (std::size_t k = 0; k < classes; ++k) {
        a.values[(i * classes + j) * classes + k] =
            static_cast<std::int8_t>((i == k ? 1 : 0) - (j == k ? 1 : 0));
      }
    }
  }
  return a;
}

PairwiseTensor build_psi(const Logits& logits) {
  require_finite(logits, "logits");
  const auto n = static_cast<std::size_t>(logits.rows());
  const auto C = static_cast<std::size_t>(logits.cols());
  if (C < 2) throw InputError("logits need at least two classes");
  PairwiseTensor psi(n, C, PairwiseRole::psi);
  for (std::size_t s = 0; s < n; ++s) {
    const double* f = logits.data() + s * C;
    for (std::size_t i = 0; i < C; ++i) {
      for (std::size_t j = 0; j < C; ++j) psi(s, i, j) = f[i] - f[j];
    }
  }
  return psi;
}

PairwiseTensor build_kappa(const OneHotLabels& labels) {
  const std::size_t C = labels.classes();
  PairwiseTensor kappa(labels.size(), C, PairwiseRole::kappa);
  for (std::size_t s = 0; s < labels.size(); ++s) {
    const std::size_t y = labels[s];
    for (std::size_t j = 0; j < C; ++j) {
      if (j == y) continue;
      kappa(s, y, j) = 1.0;
      kappa(s, j, y) = -1.0;
    }
  }
  return kappa;
}

double log_sigmoid(double x) noexcept {
  // -softplus(-x)
  return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Matrix ove_log_scores(const PairwiseTensor& psi, bool include_diagonal) {
  const std::size_t n = psi.samples();
  const std::size_t C = psi.classes();
  Matrix scores(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(C));
  const double diag = include_diagonal ? -std::log(2.0) : 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t c = 0; c < C; ++c) {
      double acc = diag;
      for (std::size_t j = 0; j < C; ++j) {
        if (j != c) acc += log_sigmoid(psi(s, c, j));
      }
      scores(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(c)) = acc;
    }
  }
  return scores;
}

double ove_probability(std::span<const double> logits, std::size_t c) {
  if (c >= logits.size()) {
    throw std::out_of_range("class " + std::to_string(c) + " out of range for " +
                            std::to_string(logits.size()) + " logits");
  }
  double log_p = 0.0;
  for (std::size_t j = 0; j < logits.size(); ++j) {
    if (j != c) log_p += log_sigmoid(logits[c] - logits[j]);
  }
  return std::exp(log_p);
}

Matrix ove_probability(const Logits& logits) {
  return ove_log_scores(build_psi(logits)).array().exp().matrix();
}

Matrix softmax_probability(const Logits& logits) {
  require_finite(logits, "logits");
  Matrix p(logits.rows(), logits.cols());
  for (Eigen::Index n = 0; n < logits.rows(); ++n) {
    const double top = logits.row(n).maxCoeff();
    p.row(n) = (logits.row(n).array() - top).exp().matrix();
    p.row(n) /= p.row(n).sum();
  }
  return p;
}

std::vector<std::size_t> argmax_rows(const Matrix& scores) {
  std::vector<std::size_t> out(static_cast<std::size_t>(scores.rows()));
  for (Eigen::Index n = 0; n < scores.rows(); ++n) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < scores.cols(); ++c) {
      if (scores(n, c) > scores(n, best)) best = c;
    }
    out[static_cast<std::size_t>(n)] = static_cast<std::size_t>(best);
  }
  return out;
}

}  // namespace ovepg
