#include "risa/trainer/config_json.hpp"

#include <algorithm>
#include <cstring>

#include "risa/core/error.hpp"

namespace risa::config_json {

namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

template <class T>
void take(const json& j, const std::string& path, const char* key, T& out) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  try {
    if constexpr (std::is_same_v<T, double>) {
      if (!v.is_number()) throw std::invalid_argument("expected a number");
    } else if constexpr (std::is_unsigned_v<T>) {
      if (!v.is_number_unsigned()) throw std::invalid_argument("expected a non-negative integer");
    }
    out = v.get<T>();
  } catch (const std::exception& e) {
    fail(ErrorKind::Config, "field '" + join(path, key) + "': " + e.what());
  }
}

void take_pair(const json& j, const std::string& path, const char* key,
               std::pair<double, double>& out) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    fail(ErrorKind::Config, "field '" + join(path, key) + "': expected [low, high]");
  }
  out = {v[0].get<double>(), v[1].get<double>()};
}

}  // namespace

void require_known_keys(const json& j, const std::string& path,
                        std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(ErrorKind::Config, "field '" + path + "' must be an object");
  for (const auto& item : j.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* k) { return item.key() == k; });
    if (!known) fail(ErrorKind::Config, "unknown field '" + join(path, item.key()) + "'");
  }
}

json to_json(const EncoderConfig& c) {
  return {{"depth", c.depth},
          {"base_channels", c.base_channels},
          {"max_channels", c.max_channels},
          {"downsamples", c.downsamples},
          {"code_dim", c.code_dim}};
}

json to_json(const BankConfig& c) {
  return {{"num_classifiers", c.num_classifiers}, {"hidden_dims", c.hidden_dims}};
}

json to_json(const TrainConfig& c) {
  return {{"batch_size", c.batch_size},       {"epochs", c.epochs},
          {"learning_rate", c.learning_rate}, {"weight_decay", c.weight_decay},
          {"adam_beta1", c.adam_beta1},       {"adam_beta2", c.adam_beta2},
          {"adam_epsilon", c.adam_epsilon},   {"seed", c.seed},
          {"checkpoint_every", c.checkpoint_every}};
}

json to_json(const LossWeights& c) {
  return {{"lambda_p", c.lambda_p},
          {"lambda_n", c.lambda_n},
          {"lambda_s", c.lambda_s},
          {"gamma", c.gamma}};
}

json to_json(const AugmentationSpec& c) {
  return {{"scale_range", {c.scale_range.first, c.scale_range.second}},
          {"crop_fraction", c.crop_fraction},
          {"clip_bounds", {c.clip_bounds.first, c.clip_bounds.second}},
          {"seed", c.seed}};
}

EncoderConfig read(const json& j, const std::string& path, EncoderConfig c) {
  require_known_keys(j, path, {"depth", "base_channels", "max_channels", "downsamples", "code_dim"});
  take(j, path, "depth", c.depth);
  take(j, path, "base_channels", c.base_channels);
  take(j, path, "max_channels", c.max_channels);
  take(j, path, "downsamples", c.downsamples);
  take(j, path, "code_dim", c.code_dim);
  return c;
}

BankConfig read(const json& j, const std::string& path, BankConfig c) {
  require_known_keys(j, path, {"num_classifiers", "hidden_dims"});
  take(j, path, "num_classifiers", c.num_classifiers);
  if (j.contains("hidden_dims")) {
    const json& v = j.at("hidden_dims");
    if (!v.is_array() || !std::all_of(v.begin(), v.end(), [](const json& e) {
          return e.is_number_unsigned() && e.get<std::size_t>() > 0;
        })) {
      fail(ErrorKind::Config, "field '" + join(path, "hidden_dims") + "': expected a list of widths");
    }
    c.hidden_dims = v.get<std::vector<std::size_t>>();
  }
  return c;
}

TrainConfig read(const json& j, const std::string& path, TrainConfig c) {
  require_known_keys(j, path,
                     {"batch_size", "epochs", "learning_rate", "weight_decay", "adam_beta1",
                      "adam_beta2", "adam_epsilon", "seed", "checkpoint_every"});
  take(j, path, "batch_size", c.batch_size);
  take(j, path, "epochs", c.epochs);
  take(j, path, "learning_rate", c.learning_rate);
  take(j, path, "weight_decay", c.weight_decay);
  take(j, path, "adam_beta1", c.adam_beta1);
  take(j, path, "adam_beta2", c.adam_beta2);
  take(j, path, "adam_epsilon", c.adam_epsilon);
  take(j, path, "seed", c.seed);
  take(j, path, "checkpoint_every", c.checkpoint_every);
  return c;
}

LossWeights read(const json& j, const std::string& path, LossWeights c) {
  require_known_keys(j, path, {"lambda_p", "lambda_n", "lambda_s", "gamma"});
  take(j, path, "lambda_p", c.lambda_p);
  take(j, path, "lambda_n", c.lambda_n);
  take(j, path, "lambda_s", c.lambda_s);
  take(j, path, "gamma", c.gamma);
  return c;
}

AugmentationSpec read(const json& j, const std::string& path, AugmentationSpec c) {
  require_known_keys(j, path, {"scale_range", "crop_fraction", "clip_bounds", "seed"});
  take_pair(j, path, "scale_range", c.scale_range);
  take(j, path, "crop_fraction", c.crop_fraction);
  take_pair(j, path, "clip_bounds", c.clip_bounds);
  take(j, path, "seed", c.seed);
  return c;
}

}  // namespace risa::config_json
