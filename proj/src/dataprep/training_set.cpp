#include "risa/dataprep/training_set.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>

#include "risa/core/error.hpp"

namespace risa {

namespace {

struct Checkpoint {
  IterationTag tag;
  std::vector<const ManifestRecord*> outputs;  // generated records in manifest order
};

std::string epsilon_tag(double eps) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(4) << eps;
  return out.str();
}

// A pair_id may appear at most once per checkpoint.
std::map<std::string, const ManifestRecord*> index_by_pair(const Checkpoint& checkpoint) {
  std::map<std::string, const ManifestRecord*> by_pair;
  for (const auto* r : checkpoint.outputs) {
    if (!by_pair.emplace(r->pair_id, r).second) {
      fail(ErrorKind::Integrity, "pair_id '" + r->pair_id + "' appears twice in checkpoint " +
                                     std::to_string(checkpoint.tag.checkpoint_index));
    }
  }
  return by_pair;
}

}  // namespace

ImageLoader file_loader(std::size_t side) {
  return [side](const std::string& path) { return load_image(path, side); };
}

TrainingSample make_real_view_sample(const ImageTensor& real, const std::string& id,
                                     const AugmentationSpec& spec, std::size_t ordinal) {
  TrainingSample s;
  s.generated = augment_style_preserving(real, spec, 2 * ordinal);
  s.reference = augment_style_preserving(real, spec, 2 * ordinal + 1);
  s.label = QualityLabel(1.0);
  s.stage = Stage::Real;
  s.reference_id = id;
  s.generated_path = id;
  return s;
}

std::vector<TrainingSample> build_training_set(const std::vector<ManifestRecord>& manifest,
                                               const TrainingSetConfig& config,
                                               const ImageLoader& loader) {
  validate(config.augmentation);
  validate_manifest(manifest);
  const std::size_t k = config.num_classifiers;

  std::map<std::string, const ManifestRecord*> references;
  std::vector<const ManifestRecord*> reals;
  std::vector<std::int64_t> iterations;
  for (const auto& r : manifest) {
    if (r.split != config.split) continue;
    if (r.role == Role::Reference) references.emplace(r.pair_id, &r);
    if (r.role == Role::Real) reals.push_back(&r);
    if (r.role == Role::Generated) {
      if (!r.iteration_tag) {
        fail(ErrorKind::Integrity, "generated record " + r.image_path + " lacks iteration_tag");
      }
      iterations.push_back(*r.iteration_tag);
    }
  }

  std::vector<TrainingSample> samples;
  std::map<std::string, ImageTensor> cache;
  auto image = [&](const std::string& path) -> const ImageTensor& {
    auto it = cache.find(path);
    if (it == cache.end()) it = cache.emplace(path, loader(path)).first;
    return it->second;
  };
  auto reference_of = [&](const ManifestRecord& r) -> const ManifestRecord& {
    const auto it = references.find(r.pair_id);
    if (it == references.end()) {
      fail(ErrorKind::Integrity, "pair_id '" + r.pair_id + "' has no reference in this split");
    }
    return *it->second;
  };
  const auto capped = [&](std::size_t n) {
    return config.samples_per_level == 0 ? n : std::min(n, config.samples_per_level);
  };

  if (!iterations.empty()) {
    const auto tags = tag_checkpoints(iterations);
    const auto labels = assign_vanilla_labels(tags, k, config.boundary);
    std::vector<Checkpoint> checkpoints;
    std::map<std::int64_t, std::size_t> slot;
    for (const auto& tag : tags) {
      slot[tag.iteration] = checkpoints.size();
      checkpoints.push_back({tag, {}});
    }
    for (const auto& r : manifest) {
      if (r.split == config.split && r.role == Role::Generated) {
        checkpoints[slot.at(*r.iteration_tag)].outputs.push_back(&r);
      }
    }

    auto emit = [&](const ManifestRecord& r, QualityLabel y, Stage stage, std::size_t index) {
      const auto& ref = reference_of(r);
      TrainingSample s;
      s.generated = image(r.image_path);
      s.reference = image(ref.image_path);
      s.label = y;
      s.stage = stage;
      s.reference_id = ref.image_path;
      s.pair_id = r.pair_id;
      s.generated_path = r.image_path;
      s.checkpoint_index = index;
      validate_sample(s, k);
      samples.push_back(std::move(s));
    };

    // Initial stage: vanilla iteration labels.
    const std::size_t boundary = config.boundary.boundary_index;
    for (std::size_t j = 1; j <= boundary; ++j) {
      const auto& cp = checkpoints[j - 1];
      for (std::size_t i = 0; i < capped(cp.outputs.size()); ++i) {
        emit(*cp.outputs[i], labels.at(j), Stage::Initial, j);
      }
    }

    // Stable stage: the converged model plus interpolation towards it.
    const auto& low = checkpoints[boundary - 1];
    const auto& high = checkpoints.back();
    for (std::size_t i = 0; i < capped(high.outputs.size()); ++i) {
      emit(*high.outputs[i], labels.at(high.tag.checkpoint_index), Stage::Stable,
           high.tag.checkpoint_index);
    }
    if (!config.epsilons.empty()) {
      const auto low_by_pair = index_by_pair(low);
      const auto high_by_pair = index_by_pair(high);
      for (const auto& [pair, r] : low_by_pair) {
        if (!high_by_pair.contains(pair)) {
          fail(ErrorKind::Integrity, "pair_id '" + pair + "' of checkpoint " +
                                         std::to_string(boundary) +
                                         " has no match in the converged checkpoint");
        }
      }
      InterpolationSpec spec{config.epsilons, labels.at(boundary),
                             labels.at(high.tag.checkpoint_index)};
      validate(spec);
      for (double eps : spec.epsilons) {
        std::size_t emitted = 0;
        for (const auto* r_high : high.outputs) {
          if (emitted == capped(high.outputs.size())) break;
          const auto match = low_by_pair.find(r_high->pair_id);
          if (match == low_by_pair.end()) {
            fail(ErrorKind::Integrity, "pair_id '" + r_high->pair_id +
                                           "' of the converged checkpoint has no match in checkpoint " +
                                           std::to_string(boundary));
          }
          const auto& ref = reference_of(*r_high);
          auto mixed = interpolate(image(match->second->image_path), image(r_high->image_path),
                                   spec.low_label, spec.high_label, eps);
          TrainingSample s;
          s.generated = std::move(mixed.image);
          s.reference = image(ref.image_path);
          s.label = mixed.label;
          s.stage = Stage::Stable;
          s.reference_id = ref.image_path;
          s.pair_id = r_high->pair_id;
          s.epsilon = eps;
          validate_sample(s, k);
          samples.push_back(std::move(s));
          ++emitted;
        }
      }
    }
  }

  // Real views, label 1.
  for (std::size_t i = 0; i < capped(reals.size()); ++i) {
    auto s = make_real_view_sample(image(reals[i]->image_path), reals[i]->image_path,
                                   config.augmentation, i);
    s.pair_id = reals[i]->pair_id;
    samples.push_back(std::move(s));
  }
  return samples;
}

std::map<double, std::size_t> level_counts(const std::vector<TrainingSample>& samples) {
  std::map<double, std::size_t> counts;
  for (const auto& s : samples) ++counts[s.label.value()];
  return counts;
}

std::vector<ManifestRecord> export_labeled_manifest(const std::vector<TrainingSample>& samples,
                                                    const std::vector<ManifestRecord>& references,
                                                    const std::filesystem::path& image_dir) {
  std::vector<ManifestRecord> out;
  std::map<std::string, bool> referenced;
  for (const auto& s : samples) {
    if (s.stage != Stage::Real) referenced[s.pair_id] = true;
  }
  for (const auto& r : references) {
    if (r.role == Role::Reference && referenced.contains(r.pair_id)) out.push_back(r);
  }
  for (const auto& s : samples) {
    ManifestRecord r;
    r.pair_id = s.pair_id;
    r.label = s.label;
    r.stage = s.stage;
    if (s.stage == Stage::Real) {
      r.role = Role::Real;
      r.image_path = s.reference_id;
    } else {
      r.role = Role::Generated;
      r.epsilon = s.epsilon;
      if (s.epsilon) {
        const auto path = image_dir / ("interp_" + s.pair_id + "_" + epsilon_tag(*s.epsilon) + ".png");
        save_image(s.generated, path);
        r.image_path = path.string();
      } else {
        r.image_path = s.generated_path;
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<TrainingSample> samples_from_labeled_manifest(
    const std::vector<ManifestRecord>& records, std::size_t num_classifiers,
    const AugmentationSpec& augmentation, const ImageLoader& loader, Split split) {
  validate_manifest(records);
  std::map<std::string, const ManifestRecord*> references;
  for (const auto& r : records) {
    if (r.role == Role::Reference && r.split == split) references.emplace(r.pair_id, &r);
  }
  std::map<std::string, ImageTensor> cache;
  auto image = [&](const std::string& path) -> const ImageTensor& {
    auto it = cache.find(path);
    if (it == cache.end()) it = cache.emplace(path, loader(path)).first;
    return it->second;
  };

  std::vector<TrainingSample> samples;
  std::size_t real_ordinal = 0;
  for (const auto& r : records) {
    if (r.split != split) continue;
    if (r.role != Role::Generated && r.role != Role::Real) continue;
    if (!r.label) {
      fail(ErrorKind::Integrity, "record " + r.image_path + " has no label; run prepare first");
    }
    if (r.role == Role::Real) {
      auto s = make_real_view_sample(image(r.image_path), r.image_path, augmentation, real_ordinal++);
      s.pair_id = r.pair_id;
      validate_sample(s, num_classifiers);
      samples.push_back(std::move(s));
      continue;
    }
    const auto ref = references.find(r.pair_id);
    if (ref == references.end()) {
      fail(ErrorKind::Integrity, "pair_id '" + r.pair_id + "' has no reference in this split");
    }
    TrainingSample s;
    s.generated = image(r.image_path);
    s.reference = image(ref->second->image_path);
    s.label = *r.label;
    s.stage = r.stage.value_or(r.epsilon ? Stage::Stable : Stage::Initial);
    s.reference_id = ref->second->image_path;
    s.pair_id = r.pair_id;
    s.generated_path = r.image_path;
    s.epsilon = r.epsilon;
    validate_sample(s, num_classifiers);
    samples.push_back(std::move(s));
  }
  return samples;
}

}  // namespace risa
