#include "support/fixtures.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "ovepg/data.hpp"

namespace ovepg::testing {

namespace {

namespace fs = std::filesystem;

constexpr std::size_t kSide = 28;
constexpr std::size_t kClasses = 10;
constexpr std::size_t kStrokes = 4;

const std::array<const char*, 8> kFiles = {
    "train-images-idx3-ubyte",
    "train-labels-idx1-ubyte",
    "t10k-images-idx3-ubyte",
    "t10k-labels-idx1-ubyte",
    "emnist-digits-train-images-idx3-ubyte",
    "emnist-digits-train-labels-idx1-ubyte",
    "emnist-digits-test-images-idx3-ubyte",
    "emnist-digits-test-labels-idx1-ubyte",
};

struct Stroke {
  double r0, c0, r1, c1;
};

using Prototype = std::array<Stroke, kStrokes>;

std::vector<Prototype> make_prototypes(std::mt19937_64& gen) {
  std::uniform_real_distribution<double> pos(6.0, 21.0);
  std::vector<Prototype> protos(kClasses);
  for (auto& p : protos) {
    for (auto& s : p) s = {pos(gen), pos(gen), pos(gen), pos(gen)};
  }
  return protos;
}

struct Style {
  double width;
  double shift_r;
  double shift_c;
  double jitter;
  double noise;
};

// Renders strokes as the max of Gaussian tubes around each segment.
void render(const Prototype& proto, const Style& style, std::mt19937_64& gen,
            std::uint8_t* out) {
  std::normal_distribution<double> nd(0.0, 1.0);
  const double dr = style.shift_r + style.jitter * nd(gen);
  const double dc = style.shift_c + style.jitter * nd(gen);
  Prototype p = proto;
  for (auto& s : p) {
    s.r0 += dr + 0.6 * nd(gen);
    s.c0 += dc + 0.6 * nd(gen);
    s.r1 += dr + 0.6 * nd(gen);
    s.c1 += dc + 0.6 * nd(gen);
  }
  const double inv_w2 = 1.0 / (2.0 * style.width * style.width);
  for (std::size_t r = 0; r < kSide; ++r) {
    for (std::size_t c = 0; c < kSide; ++c) {
      double v = 0.0;
      for (const auto& s : p) {
        const double vr = s.r1 - s.r0, vc = s.c1 - s.c0;
        const double len2 = std::max(vr * vr + vc * vc, 1e-9);
        const double t = std::clamp(((double(r) - s.r0) * vr + (double(c) - s.c0) * vc) / len2, 0.0, 1.0);
        const double er = double(r) - (s.r0 + t * vr), ec = double(c) - (s.c0 + t * vc);
        v = std::max(v, std::exp(-(er * er + ec * ec) * inv_w2));
      }
      v += style.noise * nd(gen);
      out[r * kSide + c] = static_cast<std::uint8_t>(std::clamp(std::lround(255.0 * v), 0L, 255L));
    }
  }
}

void write_split(const fs::path& dir, const char* images, const char* labels,
                 const std::vector<Prototype>& protos, const Style& style, std::size_t count,
                 bool transpose, std::mt19937_64& gen) {
  IdxImages img{count, kSide, kSide, std::vector<std::uint8_t>(count * kSide * kSide)};
  std::vector<std::uint8_t> lbl(count);
  for (std::size_t i = 0; i < count; ++i) lbl[i] = static_cast<std::uint8_t>(i % kClasses);
  std::shuffle(lbl.begin(), lbl.end(), gen);
  std::vector<std::uint8_t> canvas(kSide * kSide);
  for (std::size_t i = 0; i < count; ++i) {
    render(protos[lbl[i]], style, gen, canvas.data());
    std::uint8_t* dst = img.pixels.data() + i * kSide * kSide;
    for (std::size_t r = 0; r < kSide; ++r) {
      for (std::size_t c = 0; c < kSide; ++c) {
        dst[transpose ? c * kSide + r : r * kSide + c] = canvas[r * kSide + c];
      }
    }
  }
  write_idx_images((dir / images).string(), img);
  write_idx_labels((dir / labels).string(), lbl);
}

}  // namespace

void write_stand_in_digits(const fs::path& dir, std::uint64_t seed, const StandInSizes& sizes) {
  fs::create_directories(dir);
  std::mt19937_64 gen(seed);
  const auto protos = make_prototypes(gen);
  const Style mnist{1.2, 0.0, 0.0, 1.5, 0.08};
  const Style emnist{2.0, 2.5, -2.0, 1.5, 0.12};
  write_split(dir, kFiles[0], kFiles[1], protos, mnist, sizes.mnist_train, false, gen);
  write_split(dir, kFiles[2], kFiles[3], protos, mnist, sizes.mnist_test, false, gen);
  write_split(dir, kFiles[4], kFiles[5], protos, emnist, sizes.emnist_train, true, gen);
  write_split(dir, kFiles[6], kFiles[7], protos, emnist, sizes.emnist_test, true, gen);
}

bool has_digit_files(const fs::path& dir) {
  return std::all_of(kFiles.begin(), kFiles.end(),
                     [&](const char* f) { return fs::is_regular_file(dir / f); });
}

}  // namespace ovepg::testing
