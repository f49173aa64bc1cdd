#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "risa/classifier_bank/classifier_bank.hpp"
#include "risa/dataprep/augment.hpp"
#include "risa/objective/losses.hpp"
#include "risa/trainer/trainer.hpp"

namespace risa::cli {

enum class Profile { Desk, Paper };

std::string_view to_string(Profile profile);
Profile parse_profile(std::string_view text);

/// Synthetic degradation ladder used when no manifest is given.
struct SyntheticData {
  std::size_t base_images = 64;
  std::size_t heldout_images = 16;
  std::size_t levels = 7;
};

struct RunConfig {
  Profile profile = Profile::Desk;
  std::uint64_t seed = 0;
  std::size_t image_side = 32;
  EncoderConfig encoder;
  BankConfig bank;
  TrainConfig train;
  LossWeights loss;
  std::vector<double> epsilons = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  AugmentationSpec augmentation;
  std::optional<std::size_t> boundary_override;
  std::size_t samples_per_level = 0;
  SyntheticData synthetic;
  std::filesystem::path manifest;   // empty: build the synthetic ladder
  std::filesystem::path fid_curve;  // empty: boundary_override required
  std::filesystem::path output_dir = "runs/default";
};

/// Defaults of a profile before any config file is applied.
RunConfig profile_defaults(Profile profile);

/// Flag values that win over the file.
struct Overrides {
  std::optional<Profile> profile;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> boundary_override;
};

/// Layers profile defaults, the JSON document and the overrides, then checks
/// the result. Unknown keys and ill-typed values raise ConfigError naming the
/// dotted field. The paper profile rejects any change to K, batch size,
/// epochs or the epsilon grid. Relative paths resolve against `base_dir`.
RunConfig resolve_run_config(const nlohmann::json& document, const Overrides& overrides,
                             const std::filesystem::path& base_dir = {});

/// Reads the file (or uses an empty document when `path` is empty).
RunConfig load_run_config(const std::filesystem::path& path, const Overrides& overrides);

/// Final output directory: output_dir, placed under `root` when relative and
/// a root is set.
std::filesystem::path output_directory(const RunConfig& config,
                                       const std::optional<std::filesystem::path>& root);

nlohmann::json to_json(const RunConfig& config);

void validate(const RunConfig& config);

}  // namespace risa::cli
