#include "risa/cli/run_config.hpp"

#include <fstream>

#include "risa/core/error.hpp"
#include "risa/trainer/config_json.hpp"

namespace risa::cli {

namespace {

using nlohmann::json;

std::string field(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::size_t read_count(const json& j, const std::string& name) {
  if (!j.is_number_unsigned()) fail(ErrorKind::Config, "field '" + name + "': expected a non-negative integer");
  return j.get<std::size_t>();
}

std::filesystem::path read_path(const json& j, const std::string& name,
                                const std::filesystem::path& base) {
  if (!j.is_string()) fail(ErrorKind::Config, "field '" + name + "': expected a path string");
  std::filesystem::path p(j.get<std::string>());
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return base / p;
}

void force(bool same, const std::string& what) {
  if (!same) fail(ErrorKind::Config, "profile 'paper' fixes " + what + "; remove the override");
}

}  // namespace

std::string_view to_string(Profile profile) {
  return profile == Profile::Paper ? "paper" : "desk";
}

Profile parse_profile(std::string_view text) {
  if (text == "desk") return Profile::Desk;
  if (text == "paper") return Profile::Paper;
  fail(ErrorKind::Config, "field 'profile': expected \"desk\" or \"paper\", got \"" +
                              std::string(text) + "\"");
}

RunConfig profile_defaults(Profile profile) {
  RunConfig c;
  c.profile = profile;
  if (profile == Profile::Desk) {
    c.image_side = 32;
    c.encoder = {.depth = 6, .base_channels = 8, .max_channels = 32, .downsamples = 3, .code_dim = 16};
    c.bank = {.num_classifiers = 16, .hidden_dims = {32}};
    c.train.epochs = 80;
    c.train.learning_rate = 1e-3;
  } else {
    c.image_side = 256;
    c.encoder = {.depth = 6, .base_channels = 64, .max_channels = 512, .downsamples = 6, .code_dim = 64};
    c.bank = {.num_classifiers = 16, .hidden_dims = {64}};
    c.train.epochs = 100;
    c.train.batch_size = 4;
  }
  return c;
}

RunConfig resolve_run_config(const json& document, const Overrides& overrides,
                             const std::filesystem::path& base_dir) {
  if (!document.is_null() && !document.is_object()) {
    fail(ErrorKind::Config, "config must be a JSON object");
  }
  const json doc = document.is_null() ? json::object() : document;
  config_json::require_known_keys(
      doc, "",
      {"profile", "seed", "image_side", "encoder", "bank", "train", "loss", "interpolation",
       "augmentation", "data", "paths"});

  Profile profile = Profile::Desk;
  if (doc.contains("profile")) {
    if (!doc["profile"].is_string()) fail(ErrorKind::Config, "field 'profile': expected a string");
    profile = parse_profile(doc["profile"].get<std::string>());
  }
  if (overrides.profile) profile = *overrides.profile;
  RunConfig c = profile_defaults(profile);
  const RunConfig defaults = c;

  std::optional<std::uint64_t> seed;
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned()) fail(ErrorKind::Config, "field 'seed': expected a non-negative integer");
    seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("image_side")) c.image_side = read_count(doc["image_side"], "image_side");
  if (doc.contains("encoder")) c.encoder = config_json::read(doc["encoder"], "encoder", c.encoder);
  if (doc.contains("bank")) c.bank = config_json::read(doc["bank"], "bank", c.bank);
  if (doc.contains("train")) c.train = config_json::read(doc["train"], "train", c.train);
  if (doc.contains("loss")) c.loss = config_json::read(doc["loss"], "loss", c.loss);
  if (doc.contains("augmentation")) {
    c.augmentation = config_json::read(doc["augmentation"], "augmentation", c.augmentation);
  }
  if (doc.contains("interpolation")) {
    const json& j = doc["interpolation"];
    config_json::require_known_keys(j, "interpolation", {"epsilons"});
    if (j.contains("epsilons")) {
      const json& e = j["epsilons"];
      if (!e.is_array() || e.empty() ||
          !std::all_of(e.begin(), e.end(), [](const json& v) { return v.is_number(); })) {
        fail(ErrorKind::Config, "field 'interpolation.epsilons': expected a list of numbers");
      }
      c.epsilons = e.get<std::vector<double>>();
    }
  }
  if (doc.contains("data")) {
    const json& j = doc["data"];
    config_json::require_known_keys(j, "data", {"boundary_override", "samples_per_level", "synthetic"});
    if (j.contains("boundary_override") && !j["boundary_override"].is_null()) {
      c.boundary_override = read_count(j["boundary_override"], "data.boundary_override");
    }
    if (j.contains("samples_per_level")) {
      c.samples_per_level = read_count(j["samples_per_level"], "data.samples_per_level");
    }
    if (j.contains("synthetic")) {
      const json& s = j["synthetic"];
      const std::string path = "data.synthetic";
      config_json::require_known_keys(s, path, {"base_images", "heldout_images", "levels"});
      if (s.contains("base_images")) c.synthetic.base_images = read_count(s["base_images"], field(path, "base_images"));
      if (s.contains("heldout_images")) c.synthetic.heldout_images = read_count(s["heldout_images"], field(path, "heldout_images"));
      if (s.contains("levels")) c.synthetic.levels = read_count(s["levels"], field(path, "levels"));
    }
  }
  if (doc.contains("paths")) {
    const json& j = doc["paths"];
    config_json::require_known_keys(j, "paths", {"manifest", "fid_curve", "output_dir"});
    if (j.contains("manifest")) c.manifest = read_path(j["manifest"], "paths.manifest", base_dir);
    if (j.contains("fid_curve")) c.fid_curve = read_path(j["fid_curve"], "paths.fid_curve", base_dir);
    if (j.contains("output_dir")) c.output_dir = read_path(j["output_dir"], "paths.output_dir", {});
  }

  if (overrides.seed) seed = overrides.seed;
  if (seed) {
    c.seed = *seed;
    c.train.seed = *seed;
    c.augmentation.seed = *seed;
  } else {
    c.seed = c.train.seed;
  }
  if (overrides.boundary_override) c.boundary_override = overrides.boundary_override;

  if (profile == Profile::Paper) {
    force(c.bank.num_classifiers == defaults.bank.num_classifiers, "bank.num_classifiers = 16");
    force(c.train.batch_size == defaults.train.batch_size, "train.batch_size = 4");
    force(c.train.epochs == defaults.train.epochs, "train.epochs = 100");
    force(c.epsilons == defaults.epsilons, "interpolation.epsilons = 0.1 ... 0.9");
  }
  validate(c);
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path, const Overrides& overrides) {
  if (path.empty()) return resolve_run_config(json::object(), overrides);
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Config, "cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorKind::Config, "config " + path.string() + ": " + e.what());
  }
  return resolve_run_config(doc, overrides, path.parent_path());
}

std::filesystem::path output_directory(const RunConfig& config,
                                       const std::optional<std::filesystem::path>& root) {
  if (config.output_dir.is_absolute() || !root || root->empty()) return config.output_dir;
  return *root / config.output_dir;
}

void validate(const RunConfig& c) {
  validate(c.encoder);
  validate(c.bank);
  validate(c.train);
  validate(c.loss);
  validate(c.augmentation);
  InterpolationSpec spec;
  spec.epsilons = c.epsilons;
  validate(spec);
  if (c.image_side == 0 || c.image_side % (std::size_t{1} << c.encoder.downsamples) != 0) {
    fail(ErrorKind::Config, "field 'image_side': must be a positive multiple of 2^encoder.downsamples");
  }
  if (c.synthetic.levels < 3) fail(ErrorKind::Config, "field 'data.synthetic.levels': need at least 3");
  if (c.synthetic.base_images < 2) fail(ErrorKind::Config, "field 'data.synthetic.base_images': need at least 2");
}

nlohmann::json to_json(const RunConfig& c) {
  json j;
  j["profile"] = to_string(c.profile);
  j["seed"] = c.seed;
  j["image_side"] = c.image_side;
  j["encoder"] = config_json::to_json(c.encoder);
  j["bank"] = config_json::to_json(c.bank);
  j["train"] = config_json::to_json(c.train);
  j["loss"] = config_json::to_json(c.loss);
  j["interpolation"] = {{"epsilons", c.epsilons}};
  j["augmentation"] = config_json::to_json(c.augmentation);
  j["data"] = {{"boundary_override", c.boundary_override ? json(*c.boundary_override) : json(nullptr)},
               {"samples_per_level", c.samples_per_level},
               {"synthetic",
                {{"base_images", c.synthetic.base_images},
                 {"heldout_images", c.synthetic.heldout_images},
                 {"levels", c.synthetic.levels}}}};
  j["paths"] = {{"manifest", c.manifest.string()},
                {"fid_curve", c.fid_curve.string()},
                {"output_dir", c.output_dir.string()}};
  return j;
}

}  // namespace risa::cli
