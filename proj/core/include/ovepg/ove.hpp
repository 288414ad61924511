#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ovepg/tensor.hpp"

namespace ovepg {

/// The C x C x C comparison tensor A_ijk = delta_ik - delta_jk, laid out as
/// C blocks (index i), each a C x C matrix with rows j and columns k.
struct ATensor {
  std::size_t classes = 0;
  std::vector<std::int8_t> values;

  std::int8_t operator()(std::size_t i, std::size_t j, std::size_t k) const {
    return values[(i * classes + j) * classes + k];
  }
};

ATensor build_a_tensor(std::size_t classes);

/// psi[n,i,j] = f[n,i] - f[n,j]. Equivalent to contracting A with the logits,
/// without materialising A.
PairwiseTensor build_psi(const Logits& logits);

/// kappa[n,i,j] = y[n,i] - y[n,j]; the (y - 1/2) offsets cancel under A.
PairwiseTensor build_kappa(const OneHotLabels& labels);

/// log sigma(x) = -softplus(-x), stable for any finite x.
double log_sigmoid(double x) noexcept;
double sigmoid(double x) noexcept;

/// score[n,c] = sum_{j != c} log sigma(psi[n,c,j]); the diagonal adds log
/// sigma(0) per class when include_diagonal is set.
Matrix ove_log_scores(const PairwiseTensor& psi, bool include_diagonal = false);

/// prod_{c' != c} sigma(f_c - f_c') for a single logit row.
double ove_probability(std::span<const double> logits, std::size_t c);
/// Row-wise version over all classes.
Matrix ove_probability(const Logits& logits);

/// Max-shifted softmax, row-wise.
Matrix softmax_probability(const Logits& logits);

/// Index of the largest entry in each row; ties go to the lowest index.
std::vector<std::size_t> argmax_rows(const Matrix& scores);

}  // namespace ovepg
