#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "risa/core/image.hpp"
#include "risa/core/manifest.hpp"

// Desk-scale stand-in for a harvested GAN run. Pseudo-checkpoints are
// corrupted copies of clean images with strictly decreasing corruption, so
// the true quality order is known by construction.
namespace risa {

/// Procedural stationary RGB textures (oriented gratings over a three-colour
/// palette), one distinct "style" per image. Deterministic in seed.
std::vector<ImageTensor> synthesize_texture_corpus(std::size_t count, std::size_t side,
                                                   std::uint64_t seed);

struct CorruptionSettings {
  /// Gaussian blur sigma (pixels) at strength 1.
  double max_blur_sigma = 2.0;
  /// Additive Gaussian noise std at strength 1.
  double max_noise_std = 0.03;
};

/// Blur then add noise, both scaled by strength in [0, 1]; strength 0 returns
/// the input unchanged.
ImageTensor corrupt(const ImageTensor& image, double strength, const CorruptionSettings& settings,
                    std::uint64_t seed);

struct LadderOptions {
  CorruptionSettings corruption;
  Split split = Split::Train;
  /// Prepended to every pair_id and image path so ladders can be merged.
  std::string prefix = "ladder";
  /// Render checkpoints from a style-preserving view of the real image rather
  /// than the image itself, so a generated image shares the reference's style
  /// but not its exact layout.
  bool source_views = true;
};

/// In-memory manifest plus its images, keyed by image_path.
struct SyntheticLadder {
  std::vector<ManifestRecord> records;
  std::map<std::string, ImageTensor> images;
  /// Corruption strength of pseudo-checkpoint j at index j-1.
  std::vector<double> strengths;
  std::vector<std::int64_t> iterations;

  const ImageTensor& image(const std::string& path) const;
  /// Writes every image under `root` (paths are taken relative to it) and
  /// returns the records with rewritten absolute paths.
  std::vector<ManifestRecord> write(const std::filesystem::path& root) const;
};

/// For each real image b: one `real` record, one `reference` record (pair_id
/// <prefix>-b), and `levels` generated records, pseudo-checkpoint j at
/// strength (levels - j) / (levels - 1) tagged with iteration 1000 * j. The
/// last checkpoint is the uncorrupted source.
/// Throws ConfigError for levels < 2 or an empty corpus.
SyntheticLadder degradation_ladder_provider(const std::vector<ImageTensor>& real_images,
                                            std::size_t levels, std::uint64_t seed,
                                            const LadderOptions& options = {});

}  // namespace risa
