#include "risa/dataprep/ladder.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "risa/core/error.hpp"
#include "risa/dataprep/augment.hpp"

namespace risa {

namespace {

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)};
  return std::mt19937_64(seq);
}

std::size_t reflect(std::ptrdiff_t i, std::size_t n) {
  const auto m = static_cast<std::ptrdiff_t>(n);
  while (i < 0 || i >= m) i = i < 0 ? -i - 1 : 2 * m - i - 1;
  return static_cast<std::size_t>(i);
}

Tensor gaussian_blur(const Tensor& pixels, std::size_t side, double sigma) {
  const auto radius = static_cast<std::ptrdiff_t>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (std::ptrdiff_t i = -radius; i <= radius; ++i) {
    const double w = std::exp(-0.5 * static_cast<double>(i * i) / (sigma * sigma));
    kernel[static_cast<std::size_t>(i + radius)] = w;
    total += w;
  }
  for (double& w : kernel) w /= total;

  Tensor horizontal(pixels.shape());
  Tensor out(pixels.shape());
  for (std::size_t c = 0; c < ImageTensor::kChannels; ++c) {
    const double* src = pixels.data() + c * side * side;
    double* tmp = horizontal.data() + c * side * side;
    double* dst = out.data() + c * side * side;
    for (std::size_t y = 0; y < side; ++y) {
      for (std::size_t x = 0; x < side; ++x) {
        double acc = 0.0;
        for (std::ptrdiff_t i = -radius; i <= radius; ++i) {
          acc += kernel[static_cast<std::size_t>(i + radius)] *
                 src[y * side + reflect(static_cast<std::ptrdiff_t>(x) + i, side)];
        }
        tmp[y * side + x] = acc;
      }
    }
    for (std::size_t y = 0; y < side; ++y) {
      for (std::size_t x = 0; x < side; ++x) {
        double acc = 0.0;
        for (std::ptrdiff_t i = -radius; i <= radius; ++i) {
          acc += kernel[static_cast<std::size_t>(i + radius)] *
                 tmp[reflect(static_cast<std::ptrdiff_t>(y) + i, side) * side + x];
        }
        dst[y * side + x] = acc;
      }
    }
  }
  return out;
}

}  // namespace

std::vector<ImageTensor> synthesize_texture_corpus(std::size_t count, std::size_t side,
                                                   std::uint64_t seed) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  std::vector<ImageTensor> corpus;
  corpus.reserve(count);
  for (std::size_t b = 0; b < count; ++b) {
    auto rng = make_rng(seed, b, 0x7e57);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    // The two base colours differ by at least 0.35 per channel so every
    // texture has contrast for the corruption to destroy.
    std::array<std::array<double, 3>, 3> palette{};
    for (std::size_t c = 0; c < 3; ++c) {
      palette[0][c] = unit(rng);
      palette[1][c] = std::fmod(palette[0][c] + 0.35 + 0.3 * unit(rng), 1.0);
      palette[2][c] = unit(rng);
    }
    // Periods are fixed in pixels (not in image widths) so the fine detail
    // sits where the pixel-scale blur removes it, at any resolution.
    const auto cycles_for = [&](double min_period, double max_period) {
      return static_cast<double>(side) / (min_period + (max_period - min_period) * unit(rng));
    };
    struct Grating {
      double fx, fy, phase, amplitude;
    };
    std::array<Grating, 3> gratings{};
    for (auto& g : gratings) {
      const double theta = kTwoPi * unit(rng);
      const double cycles = cycles_for(3.5, 7.0);
      g = {cycles * std::cos(theta), cycles * std::sin(theta), kTwoPi * unit(rng),
           0.5 + unit(rng)};
    }
    // Second grating set modulates the accent colour; everything is
    // stationary so any crop carries the same style.
    std::array<Grating, 2> accents{};
    for (auto& g : accents) {
      const double theta = kTwoPi * unit(rng);
      const double cycles = cycles_for(3.0, 8.0);
      g = {cycles * std::cos(theta), cycles * std::sin(theta), kTwoPi * unit(rng),
           0.5 + unit(rng)};
    }
    const double accent_gain = 1.0 + 3.0 * unit(rng);

    Tensor pixels({ImageTensor::kChannels, side, side});
    for (std::size_t y = 0; y < side; ++y) {
      for (std::size_t x = 0; x < side; ++x) {
        const double u = (static_cast<double>(x) + 0.5) / static_cast<double>(side);
        const double v = (static_cast<double>(y) + 0.5) / static_cast<double>(side);
        double wave = 0.0;
        for (const auto& g : gratings) {
          wave += g.amplitude * std::sin(kTwoPi * (g.fx * u + g.fy * v) + g.phase);
        }
        double accent = 0.0;
        for (const auto& g : accents) {
          accent += g.amplitude * std::sin(kTwoPi * (g.fx * u + g.fy * v) + g.phase);
        }
        const double t = 0.5 + 0.5 * std::tanh(wave);
        const double s = 0.6 / (1.0 + std::exp(-accent_gain * accent));
        for (std::size_t c = 0; c < 3; ++c) {
          const double base = palette[0][c] * (1.0 - t) + palette[1][c] * t;
          pixels[(c * side + y) * side + x] = base * (1.0 - s) + palette[2][c] * s;
        }
      }
    }
    corpus.push_back(ImageTensor::clamped(std::move(pixels)));
  }
  return corpus;
}

ImageTensor corrupt(const ImageTensor& image, double strength, const CorruptionSettings& settings,
                    std::uint64_t seed) {
  if (!(strength >= 0.0 && strength <= 1.0)) {
    fail(ErrorKind::Domain, "corruption strength must lie in [0, 1]");
  }
  if (strength == 0.0) return image;
  Tensor pixels = image.tensor();
  const double sigma = strength * settings.max_blur_sigma;
  if (sigma > 0.0) pixels = gaussian_blur(pixels, image.side(), sigma);
  const double noise_std = strength * settings.max_noise_std;
  if (noise_std > 0.0) {
    auto rng = make_rng(seed, 0x5eed, 1);
    std::normal_distribution<double> noise(0.0, noise_std);
    for (double& v : pixels.values()) v += noise(rng);
  }
  return ImageTensor::clamped(std::move(pixels));
}

const ImageTensor& SyntheticLadder::image(const std::string& path) const {
  const auto it = images.find(path);
  if (it == images.end()) fail(ErrorKind::Integrity, "no synthetic image at '" + path + "'");
  return it->second;
}

std::vector<ManifestRecord> SyntheticLadder::write(const std::filesystem::path& root) const {
  for (const auto& [path, img] : images) save_image(img, root / path);
  auto out = records;
  for (auto& r : out) r.image_path = (root / r.image_path).string();
  return out;
}

SyntheticLadder degradation_ladder_provider(const std::vector<ImageTensor>& real_images,
                                            std::size_t levels, std::uint64_t seed,
                                            const LadderOptions& options) {
  if (levels < 2) fail(ErrorKind::Config, "a degradation ladder needs at least 2 levels");
  if (real_images.empty()) fail(ErrorKind::Config, "degradation ladder needs a non-empty corpus");

  SyntheticLadder ladder;
  for (std::size_t j = 1; j <= levels; ++j) {
    ladder.strengths.push_back(static_cast<double>(levels - j) / static_cast<double>(levels - 1));
    ladder.iterations.push_back(static_cast<std::int64_t>(1000 * j));
  }
  AugmentationSpec view_spec;
  view_spec.seed = seed ^ 0x5017ceULL;
  for (std::size_t b = 0; b < real_images.size(); ++b) {
    const std::string pair_id = options.prefix + "-" + std::to_string(b);
    const std::string clean_path = options.prefix + "/clean/" + std::to_string(b) + ".png";
    ladder.images.emplace(clean_path, real_images[b]);
    ladder.records.push_back({clean_path, Role::Real, std::nullopt, std::nullopt, std::nullopt,
                              pair_id, options.split, std::nullopt});
    ladder.records.push_back({clean_path, Role::Reference, std::nullopt, std::nullopt,
                              std::nullopt, pair_id, options.split, std::nullopt});
    // Every checkpoint renders the same source, so outputs of one pair stay
    // pixel-aligned across checkpoints.
    const ImageTensor source =
        options.source_views ? augment_style_preserving(real_images[b], view_spec, b) : real_images[b];
    for (std::size_t j = 1; j <= levels; ++j) {
      const std::string path =
          options.prefix + "/ckpt" + std::to_string(j) + "/" + std::to_string(b) + ".png";
      ladder.images.emplace(path, corrupt(source, ladder.strengths[j - 1],
                                          options.corruption, seed * 1000003 + b * 131 + j));
      ladder.records.push_back({path, Role::Generated, ladder.iterations[j - 1], std::nullopt,
                                std::nullopt, pair_id, options.split, std::nullopt});
    }
  }
  return ladder;
}

}  // namespace risa
