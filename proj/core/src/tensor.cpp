#include "ovepg/tensor.hpp"

#include <cmath>
#include <string>

#include "ovepg/errors.hpp"

namespace ovepg {

const char* to_string(LoadErrorKind kind) noexcept {
  switch (kind) {
    case LoadErrorKind::io: return "io";
    case LoadErrorKind::bad_magic: return "bad_magic";
    case LoadErrorKind::truncated: return "truncated";
    case LoadErrorKind::count_mismatch: return "count_mismatch";
    case LoadErrorKind::label_out_of_range: return "label_out_of_range";
    case LoadErrorKind::bad_header: return "bad_header";
  }
  return "unknown";
}

OneHotLabels::OneHotLabels(std::vector<std::size_t> indices, std::size_t classes)
    : indices_(std::move(indices)), classes_(classes) {
  if (classes_ < 2) throw InputError("labels need at least two classes");
  for (std::size_t n = 0; n < indices_.size(); ++n) {
    if (indices_[n] >= classes_) {
      throw InputError("label " + std::to_string(indices_[n]) + " at row " + std::to_string(n) +
                       " outside " + std::to_string(classes_) + " classes");
    }
  }
}

OneHotLabels OneHotLabels::from_matrix(const Matrix& one_hot) {
  std::vector<std::size_t> idx(static_cast<std::size_t>(one_hot.rows()));
  for (Eigen::Index n = 0; n < one_hot.rows(); ++n) {
    int ones = 0;
    for (Eigen::Index c = 0; c < one_hot.cols(); ++c) {
      const double v = one_hot(n, c);
      if (v == 1.0) {
        ++ones;
        idx[static_cast<std::size_t>(n)] = static_cast<std::size_t>(c);
      } else if (v != 0.0) {
        ones = -1;
        break;
      }
    }
    if (ones != 1) throw InputError("row " + std::to_string(n) + " is not one-hot");
  }
  return OneHotLabels(std::move(idx), static_cast<std::size_t>(one_hot.cols()));
}

Matrix OneHotLabels::to_matrix() const {
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(size()), static_cast<Eigen::Index>(classes_));
  for (std::size_t n = 0; n < size(); ++n) {
    m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(indices_[n])) = 1.0;
  }
  return m;
}

OneHotLabels OneHotLabels::gather(std::span<const std::size_t> rows) const {
  std::vector<std::size_t> idx;
  idx.reserve(rows.size());
  for (auto r : rows) idx.push_back(indices_.at(r));
  return OneHotLabels(std::move(idx), classes_);
}

std::string_view to_string(PairwiseRole role) noexcept {
  switch (role) {
    case PairwiseRole::psi: return "psi";
    case PairwiseRole::kappa: return "kappa";
    case PairwiseRole::omega: return "omega";
    case PairwiseRole::variance: return "variance";
    case PairwiseRole::noise: return "noise";
  }
  return "unknown";
}

PairwiseTensor::PairwiseTensor(std::size_t samples, std::size_t classes, PairwiseRole role,
                               double fill)
    : samples_(samples), classes_(classes), role_(role),
      values_(samples * classes * classes, fill) {}

void require_finite(const Matrix& m, std::string_view what) {
  if (!m.allFinite()) throw InputError(std::string(what) + " contains non-finite values");
}

}  // namespace ovepg
