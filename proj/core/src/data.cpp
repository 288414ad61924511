#include "ovepg/data.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <iterator>
#include <string>

#include "ovepg/errors.hpp"
#include "ovepg/rng.hpp"

namespace ovepg {

namespace {

constexpr std::uint32_t kImageMagic = 2051;
constexpr std::uint32_t kLabelMagic = 2049;

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError(LoadErrorKind::io, "cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<std::uint8_t>& bytes, std::size_t offset,
                        const std::string& path) {
  if (bytes.size() < offset + 4) throw LoadError(LoadErrorKind::truncated, path + ": short header");
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void put_be32(std::ofstream& out, std::uint32_t v) {
  const std::array<char, 4> b{static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                              static_cast<char>(v >> 8), static_cast<char>(v)};
  out.write(b.data(), 4);
}

}  // namespace

Dataset Dataset::gather(std::span<const std::size_t> rows) const {
  Dataset out;
  out.inputs.resize(static_cast<Eigen::Index>(rows.size()), inputs.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.inputs.row(static_cast<Eigen::Index>(r)) = inputs.row(static_cast<Eigen::Index>(rows[r]));
  }
  out.labels = labels.gather(rows);
  out.provenance = provenance;
  return out;
}

Dataset gen_1d_synth(std::size_t n_per_class, std::uint64_t seed) {
  if (n_per_class < 1) throw ParameterError("n_per_class must be at least 1");
  constexpr std::array<double, 3> means{1.0, 0.0, -1.0};
  constexpr std::array<double, 3> stds{1.0, 2.0, 1.0};
  Rng rng(RngState{seed, 0x73796e7431ULL});
  Dataset d;
  d.inputs.resize(static_cast<Eigen::Index>(3 * n_per_class), 1);
  std::vector<std::size_t> labels;
  labels.reserve(3 * n_per_class);
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < n_per_class; ++i) {
      d.inputs(static_cast<Eigen::Index>(labels.size()), 0) = means[c] + stds[c] * rng.normal();
      labels.push_back(c);
    }
  }
  d.labels = OneHotLabels(std::move(labels), 3);
  d.provenance = "synthetic:1d:seed=" + std::to_string(seed);
  return d;
}

IdxImages read_idx_images(const std::string& path) {
  const auto bytes = read_file(path);
  if (read_be32(bytes, 0, path) != kImageMagic) {
    throw LoadError(LoadErrorKind::bad_magic, path + ": not an IDX image file");
  }
  IdxImages img;
  img.count = read_be32(bytes, 4, path);
  img.rows = read_be32(bytes, 8, path);
  img.cols = read_be32(bytes, 12, path);
  const std::size_t payload = img.count * img.rows * img.cols;
  if (bytes.size() < 16 + payload) {
    throw LoadError(LoadErrorKind::truncated, path + ": expected " + std::to_string(payload) +
                                                  " pixel bytes, found " +
                                                  std::to_string(bytes.size() - 16));
  }
  img.pixels.assign(bytes.begin() + 16, bytes.begin() + 16 + static_cast<std::ptrdiff_t>(payload));
  return img;
}

std::vector<std::uint8_t> read_idx_labels(const std::string& path) {
  const auto bytes = read_file(path);
  if (read_be32(bytes, 0, path) != kLabelMagic) {
    throw LoadError(LoadErrorKind::bad_magic, path + ": not an IDX label file");
  }
  const std::size_t count = read_be32(bytes, 4, path);
  if (bytes.size() < 8 + count) {
    throw LoadError(LoadErrorKind::truncated, path + ": expected " + std::to_string(count) + " labels");
  }
  return {bytes.begin() + 8, bytes.begin() + 8 + static_cast<std::ptrdiff_t>(count)};
}

void write_idx_images(const std::string& path, const IdxImages& images) {
  if (images.pixels.size() != images.count * images.rows * images.cols) {
    throw InputError("IDX image payload size disagrees with its dimensions");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LoadError(LoadErrorKind::io, "cannot open " + path + " for writing");
  put_be32(out, kImageMagic);
  put_be32(out, static_cast<std::uint32_t>(images.count));
  put_be32(out, static_cast<std::uint32_t>(images.rows));
  put_be32(out, static_cast<std::uint32_t>(images.cols));
  out.write(reinterpret_cast<const char*>(images.pixels.data()),
            static_cast<std::streamsize>(images.pixels.size()));
}

void write_idx_labels(const std::string& path, std::span<const std::uint8_t> labels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LoadError(LoadErrorKind::io, "cannot open " + path + " for writing");
  put_be32(out, kLabelMagic);
  put_be32(out, static_cast<std::uint32_t>(labels.size()));
  out.write(reinterpret_cast<const char*>(labels.data()), static_cast<std::streamsize>(labels.size()));
}

Dataset load_idx(const std::string& images_path, const std::string& labels_path,
                 const IdxOptions& options) {
  const IdxImages img = read_idx_images(images_path);
  const auto raw = read_idx_labels(labels_path);
  if (raw.size() != img.count) {
    throw LoadError(LoadErrorKind::count_mismatch,
                    std::to_string(img.count) + " images but " + std::to_string(raw.size()) + " labels");
  }
  if (options.transpose && img.rows != img.cols) {
    throw LoadError(LoadErrorKind::bad_header, "transpose requires square images");
  }
  std::size_t classes = 0;
  if (options.classes) {
    classes = *options.classes;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (raw[i] >= classes) {
        throw LoadError(LoadErrorKind::label_out_of_range,
                        labels_path + ": label " + std::to_string(raw[i]) + " at index " +
                            std::to_string(i) + " outside " + std::to_string(classes) + " classes");
      }
    }
  } else {
    classes = raw.empty() ? 0 : std::size_t{*std::max_element(raw.begin(), raw.end())} + 1;
  }
  if (classes < 2) {
    throw LoadError(LoadErrorKind::label_out_of_range, labels_path + ": fewer than two classes");
  }

  const std::size_t d = img.rows * img.cols;
  Dataset data;
  data.inputs.resize(static_cast<Eigen::Index>(img.count), static_cast<Eigen::Index>(d));
  for (std::size_t n = 0; n < img.count; ++n) {
    const std::uint8_t* src = img.pixels.data() + n * d;
    double* dst = data.inputs.data() + n * d;
    if (options.transpose) {
      for (std::size_t r = 0; r < img.rows; ++r) {
        for (std::size_t c = 0; c < img.cols; ++c) dst[r * img.cols + c] = src[c * img.rows + r] / 255.0;
      }
    } else {
      for (std::size_t p = 0; p < d; ++p) dst[p] = src[p] / 255.0;
    }
  }
  data.labels = OneHotLabels(std::vector<std::size_t>(raw.begin(), raw.end()), classes);
  data.provenance = images_path;
  return data;
}

Dataset subset_per_class(const Dataset& data, std::size_t k) {
  if (k < 1) throw ParameterError("per-class subset size must be at least 1");
  std::vector<std::size_t> taken(data.classes(), 0);
  std::vector<std::size_t> rows;
  rows.reserve(k * data.classes());
  for (std::size_t n = 0; n < data.size(); ++n) {
    auto& t = taken[data.labels[n]];
    if (t < k) {
      ++t;
      rows.push_back(n);
    }
  }
  for (std::size_t c = 0; c < taken.size(); ++c) {
    if (taken[c] < k) {
      throw InputError("class " + std::to_string(c) + " has only " + std::to_string(taken[c]) +
                       " samples, " + std::to_string(k) + " requested");
    }
  }
  Dataset out = data.gather(rows);
  out.provenance = data.provenance + ":first" + std::to_string(k) + "perclass";
  return out;
}

std::uint64_t file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError(LoadErrorKind::io, "cannot open " + path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  std::array<char, 1 << 16> buf;
  while (in.read(buf.data(), buf.size()) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[static_cast<std::size_t>(i)]);
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

}  // namespace ovepg
