#pragma once

#include <string>

#include <json.hpp>

#include "risa/classifier_bank/classifier_bank.hpp"
#include "risa/dataprep/augment.hpp"
#include "risa/objective/losses.hpp"
#include "risa/trainer/trainer.hpp"

// JSON mapping of the configuration blocks, shared by the checkpoint header
// and the CLI config file. Readers start from `base`, overwrite the keys that
// are present and reject unknown keys with a ConfigError naming the full
// dotted path (e.g. "train.learning_rat").
namespace risa::config_json {

using nlohmann::json;

json to_json(const EncoderConfig& c);
json to_json(const BankConfig& c);
json to_json(const TrainConfig& c);
json to_json(const LossWeights& c);
json to_json(const AugmentationSpec& c);

EncoderConfig read(const json& j, const std::string& path, EncoderConfig base);
BankConfig read(const json& j, const std::string& path, BankConfig base);
TrainConfig read(const json& j, const std::string& path, TrainConfig base);
LossWeights read(const json& j, const std::string& path, LossWeights base);
AugmentationSpec read(const json& j, const std::string& path, AugmentationSpec base);

/// Throws ConfigError unless `j` is an object whose keys all appear in `allowed`.
void require_known_keys(const json& j, const std::string& path,
                        std::initializer_list<const char*> allowed);

}  // namespace risa::config_json
