#pragma once

// Small synthetic stand-ins for the MNIST and EMNIST-digits IDX files, used
// when the real datasets are not available.

#include <cstddef>
#include <cstdint>
#include <filesystem>

namespace ovepg::testing {

struct StandInSizes {
  std::size_t mnist_train = 6000;
  std::size_t mnist_test = 2000;
  std::size_t emnist_train = 3000;
  std::size_t emnist_test = 2000;
};

/// Writes the eight IDX files under `dir` with their standard names, so the
/// directory can be used as OVEPG_DATA_DIR.
///
/// Both domains draw from the same ten class prototypes (a few Gaussian
/// strokes on a 28 x 28 canvas). The EMNIST-like domain uses thicker, shifted
/// strokes and is stored transposed, as the real EMNIST files are.
void write_stand_in_digits(const std::filesystem::path& dir, std::uint64_t seed,
                           const StandInSizes& sizes = {});

/// True when all eight standard files exist under `dir`.
bool has_digit_files(const std::filesystem::path& dir);

}  // namespace ovepg::testing
