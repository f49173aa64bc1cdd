#include "risa/core/manifest.hpp"

#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <string>

#include <json.hpp>

#include "risa/core/error.hpp"

namespace risa {

using nlohmann::json;

namespace {

Role parse_role(const std::string& text) {
  if (text == "generated") return Role::Generated;
  if (text == "reference") return Role::Reference;
  if (text == "source") return Role::Source;
  if (text == "real") return Role::Real;
  fail(ErrorKind::Parse, "unknown role '" + text + "'");
}

Split parse_split(const std::string& text) {
  if (text == "train") return Split::Train;
  if (text == "val") return Split::Val;
  if (text == "test") return Split::Test;
  fail(ErrorKind::Parse, "unknown split '" + text + "'");
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {"image_path", "role",    "iteration_tag", "epsilon",
                                             "label",      "pair_id", "split",         "stage"};
  return keys;
}

ManifestRecord record_from_json(const json& j) {
  if (!j.is_object()) fail(ErrorKind::Parse, "manifest line is not a JSON object");
  for (const auto& item : j.items()) {
    if (!known_keys().contains(item.key())) {
      fail(ErrorKind::Parse, "unknown manifest key '" + item.key() + "'");
    }
  }
  ManifestRecord r;
  if (!j.contains("image_path") || !j["image_path"].is_string()) {
    fail(ErrorKind::Parse, "missing string field 'image_path'");
  }
  r.image_path = j["image_path"].get<std::string>();
  if (!j.contains("role") || !j["role"].is_string()) {
    fail(ErrorKind::Parse, "missing string field 'role'");
  }
  r.role = parse_role(j["role"].get<std::string>());

  if (j.contains("iteration_tag") && !j["iteration_tag"].is_null()) {
    const auto& v = j["iteration_tag"];
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
      fail(ErrorKind::Parse, "iteration_tag must be a non-negative integer");
    }
    r.iteration_tag = v.get<std::int64_t>();
  }
  if (j.contains("epsilon") && !j["epsilon"].is_null()) {
    const auto& v = j["epsilon"];
    if (!v.is_number() || !(v.get<double>() > 0.0 && v.get<double>() < 1.0)) {
      fail(ErrorKind::Parse, "epsilon must be a number in (0, 1)");
    }
    r.epsilon = v.get<double>();
  }
  if (j.contains("label") && !j["label"].is_null()) {
    if (!j["label"].is_number()) fail(ErrorKind::Parse, "label must be a number");
    const double y = j["label"].get<double>();
    if (!(y >= 0.0 && y <= 1.0)) fail(ErrorKind::Parse, "label must lie in [0, 1]");
    r.label = QualityLabel(y);
  }
  if (j.contains("pair_id") && !j["pair_id"].is_null()) {
    if (!j["pair_id"].is_string()) fail(ErrorKind::Parse, "pair_id must be a string");
    r.pair_id = j["pair_id"].get<std::string>();
  }
  if (j.contains("split")) {
    if (!j["split"].is_string()) fail(ErrorKind::Parse, "split must be a string");
    r.split = parse_split(j["split"].get<std::string>());
  }
  if (j.contains("stage") && !j["stage"].is_null()) {
    if (!j["stage"].is_string()) fail(ErrorKind::Parse, "stage must be a string");
    r.stage = parse_stage(j["stage"].get<std::string>());
  }
  return r;
}

}  // namespace

std::string_view to_string(Role role) {
  switch (role) {
    case Role::Generated: return "generated";
    case Role::Reference: return "reference";
    case Role::Source: return "source";
    case Role::Real: return "real";
  }
  return "?";
}

std::string_view to_string(Split split) {
  switch (split) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "?";
}

ManifestRecord parse_manifest_line(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::Parse, e.what());
  }
  return record_from_json(j);
}

std::string to_manifest_line(const ManifestRecord& r) {
  // ordered_json keeps the field order stable across writes.
  nlohmann::ordered_json j;
  j["image_path"] = r.image_path;
  j["role"] = to_string(r.role);
  if (r.iteration_tag) j["iteration_tag"] = *r.iteration_tag;
  if (r.epsilon) j["epsilon"] = *r.epsilon;
  if (r.label) j["label"] = r.label->value();
  if (!r.pair_id.empty()) j["pair_id"] = r.pair_id;
  j["split"] = to_string(r.split);
  if (r.stage) j["stage"] = to_string(*r.stage);
  return j.dump();
}

void validate_manifest(const std::vector<ManifestRecord>& records) {
  std::map<std::string, int> references;
  for (const auto& r : records) {
    if (r.role == Role::Reference && !r.pair_id.empty()) ++references[r.pair_id];
  }
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    const std::string where = "record " + std::to_string(i + 1) + " (" + r.image_path + ")";
    if (r.epsilon && r.role != Role::Generated) {
      fail(ErrorKind::Integrity, where + ": epsilon is only valid on interpolated images");
    }
    if (r.role != Role::Generated) continue;
    if (r.pair_id.empty()) fail(ErrorKind::Integrity, where + ": generated record lacks pair_id");
    const auto it = references.find(r.pair_id);
    if (it == references.end()) {
      fail(ErrorKind::Integrity, where + ": pair_id '" + r.pair_id + "' has no reference record");
    }
    if (it->second != 1) {
      fail(ErrorKind::Integrity, where + ": pair_id '" + r.pair_id + "' matches " +
                                     std::to_string(it->second) + " reference records");
    }
  }
}

std::vector<ManifestRecord> read_manifest(std::istream& in) {
  std::vector<ManifestRecord> records;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      records.push_back(parse_manifest_line(line));
    } catch (const Error& e) {
      fail(ErrorKind::Parse, "line " + std::to_string(line_number) + ": " + e.what());
    }
  }
  validate_manifest(records);
  return records;
}

std::vector<ManifestRecord> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open manifest " + path.string());
  return read_manifest(in);
}

void write_manifest(const std::vector<ManifestRecord>& records, std::ostream& out) {
  for (const auto& r : records) out << to_manifest_line(r) << '\n';
}

void write_manifest(const std::vector<ManifestRecord>& records, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot write manifest " + path.string());
  write_manifest(records, out);
  if (!out) fail(ErrorKind::Io, "failed writing manifest " + path.string());
}

}  // namespace risa
