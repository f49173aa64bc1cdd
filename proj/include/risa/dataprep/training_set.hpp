#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "risa/core/manifest.hpp"
#include "risa/core/types.hpp"
#include "risa/dataprep/augment.hpp"
#include "risa/dataprep/labels.hpp"

namespace risa {

/// Resolves a manifest image_path to pixels.
using ImageLoader = std::function<ImageTensor(const std::string& path)>;

/// Loader that reads files with load_image at a fixed side.
ImageLoader file_loader(std::size_t side);

struct TrainingSetConfig {
  std::size_t num_classifiers = 16;
  StageBoundary boundary;
  std::vector<double> epsilons = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  AugmentationSpec augmentation;
  /// Cap on samples per label level, real views included; 0 keeps all.
  std::size_t samples_per_level = 0;
  Split split = Split::Train;
};

/// Assembles the weakly labeled set from a manifest of checkpoint outputs:
///  - initial stage: every output of checkpoints 1..boundary with its vanilla
///    label;
///  - converged checkpoint J with (K-1)/K, plus one interpolated sample per
///    epsilon between the boundary checkpoint and checkpoint J for each
///    pair_id present in both;
///  - one real-view sample (two augmentations, label 1) per `real` record.
/// Only records of config.split are used. Throws IntegrityError when a
/// pair_id appears in only one of the two interpolation checkpoints or twice
/// in one checkpoint.
std::vector<TrainingSample> build_training_set(const std::vector<ManifestRecord>& manifest,
                                               const TrainingSetConfig& config,
                                               const ImageLoader& loader);

/// Real-view sample of one real image; views use draws 2*ordinal and
/// 2*ordinal + 1.
TrainingSample make_real_view_sample(const ImageTensor& real, const std::string& id,
                                     const AugmentationSpec& spec, std::size_t ordinal);

/// Number of samples per distinct label value.
std::map<double, std::size_t> level_counts(const std::vector<TrainingSample>& samples);

/// Persists a built training set as a labeled manifest. Interpolated images
/// are written as 16-bit PNGs under `image_dir`; other samples keep the
/// manifest paths they came from. `references` supplies the reference records.
std::vector<ManifestRecord> export_labeled_manifest(const std::vector<TrainingSample>& samples,
                                                    const std::vector<ManifestRecord>& references,
                                                    const std::filesystem::path& image_dir);

/// Inverse of export_labeled_manifest: labeled generated records become
/// samples, labeled real records become real-view samples.
std::vector<TrainingSample> samples_from_labeled_manifest(
    const std::vector<ManifestRecord>& records, std::size_t num_classifiers,
    const AugmentationSpec& augmentation, const ImageLoader& loader,
    Split split = Split::Train);

}  // namespace risa
