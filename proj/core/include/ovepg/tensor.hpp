#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace ovepg {

/// Dense row-major matrix used for logits (n x C), inputs and gradients.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// n x C matrix of class scores, one row per sample.
using Logits = Matrix;

/// Class labels with an explicit class count. Stored as indices; the one-hot
/// matrix is materialised on request.
class OneHotLabels {
 public:
  OneHotLabels() = default;
  OneHotLabels(std::vector<std::size_t> indices, std::size_t classes);

  /// Validates that every row holds exactly one 1 and zeros elsewhere.
  static OneHotLabels from_matrix(const Matrix& one_hot);

  std::size_t size() const noexcept { return indices_.size(); }
  std::size_t classes() const noexcept { return classes_; }
  std::size_t operator[](std::size_t n) const { return indices_[n]; }
  std::span<const std::size_t> indices() const noexcept { return indices_; }

  Matrix to_matrix() const;
  OneHotLabels gather(std::span<const std::size_t> rows) const;

  friend bool operator==(const OneHotLabels&, const OneHotLabels&) = default;

 private:
  std::vector<std::size_t> indices_;
  std::size_t classes_ = 0;
};

enum class PairwiseRole { psi, kappa, omega, variance, noise };

std::string_view to_string(PairwiseRole role) noexcept;

/// n x C x C array indexed (sample, i, j), stored contiguously with j fastest.
class PairwiseTensor {
 public:
  PairwiseTensor() = default;
  PairwiseTensor(std::size_t samples, std::size_t classes, PairwiseRole role,
                 double fill = 0.0);

  std::size_t samples() const noexcept { return samples_; }
  std::size_t classes() const noexcept { return classes_; }
  std::size_t size() const noexcept { return values_.size(); }
  PairwiseRole role() const noexcept { return role_; }

  double& operator()(std::size_t n, std::size_t i, std::size_t j) noexcept {
    return values_[(n * classes_ + i) * classes_ + j];
  }
  double operator()(std::size_t n, std::size_t i, std::size_t j) const noexcept {
    return values_[(n * classes_ + i) * classes_ + j];
  }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  bool same_shape(const PairwiseTensor& other) const noexcept {
    return samples_ == other.samples_ && classes_ == other.classes_;
  }

 private:
  std::size_t samples_ = 0;
  std::size_t classes_ = 0;
  PairwiseRole role_ = PairwiseRole::psi;
  std::vector<double> values_;
};

/// Throws InputError if any entry is NaN or infinite.
void require_finite(const Matrix& m, std::string_view what);

}  // namespace ovepg
