#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ovepg/tensor.hpp"

namespace ovepg {

struct Dataset {
  Matrix inputs;
  OneHotLabels labels;
  std::string provenance;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t classes() const noexcept { return labels.classes(); }

  /// Rows in the given order.
  Dataset gather(std::span<const std::size_t> rows) const;
};

/// Three scalar Gaussian classes: N(1, 1), N(0, 2^2), N(-1, 1), laid out class
/// by class.
Dataset gen_1d_synth(std::size_t n_per_class, std::uint64_t seed);

struct IdxOptions {
  /// Transpose every image (the EMNIST distribution stores images transposed).
  bool transpose = false;
  /// Expected class count; labels at or above it are a load error. When unset
  /// the class count is max(label) + 1.
  std::optional<std::size_t> classes;
};

/// Reads an IDX3 image file and IDX1 label file. Pixels scale to [0, 1].
Dataset load_idx(const std::string& images_path, const std::string& labels_path,
                 const IdxOptions& options = {});

struct IdxImages {
  std::size_t count = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> pixels;
};

IdxImages read_idx_images(const std::string& path);
std::vector<std::uint8_t> read_idx_labels(const std::string& path);
void write_idx_images(const std::string& path, const IdxImages& images);
void write_idx_labels(const std::string& path, std::span<const std::uint8_t> labels);

/// First k samples of each class in file order, original order preserved.
Dataset subset_per_class(const Dataset& data, std::size_t k);

/// FNV-1a 64-bit digest of a file's bytes.
std::uint64_t file_digest(const std::string& path);

}  // namespace ovepg
