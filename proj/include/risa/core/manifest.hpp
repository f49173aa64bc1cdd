#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "risa/core/types.hpp"

namespace risa {

enum class Role { Generated, Reference, Source, Real };
enum class Split { Train, Val, Test };

std::string_view to_string(Role role);
std::string_view to_string(Split split);

/// One line of the JSON-lines dataset manifest.
///
///   {"image_path": "...", "role": "generated", "iteration_tag": 10000,
///    "epsilon": 0.3, "label": 0.5, "pair_id": "p17", "split": "train",
///    "stage": "stable"}
///
/// Optional keys are omitted when absent. `stage` is written by `prepare`
/// for labeled records.
struct ManifestRecord {
  std::string image_path;
  Role role = Role::Generated;
  std::optional<std::int64_t> iteration_tag;
  std::optional<double> epsilon;
  std::optional<QualityLabel> label;
  std::string pair_id;
  Split split = Split::Train;
  std::optional<Stage> stage;

  bool operator==(const ManifestRecord&) const = default;
};

/// Parses one manifest line. Throws ParseError on malformed JSON, unknown
/// keys, or out-of-range fields.
ManifestRecord parse_manifest_line(std::string_view line);
std::string to_manifest_line(const ManifestRecord& record);

/// Reads and validates a whole manifest: blank lines are skipped, parse
/// errors name the 1-based line number, and every generated record must
/// resolve to exactly one reference record through pair_id (IntegrityError).
std::vector<ManifestRecord> load_manifest(const std::filesystem::path& path);
std::vector<ManifestRecord> read_manifest(std::istream& in);

void validate_manifest(const std::vector<ManifestRecord>& records);

void write_manifest(const std::vector<ManifestRecord>& records, const std::filesystem::path& path);
void write_manifest(const std::vector<ManifestRecord>& records, std::ostream& out);

}  // namespace risa
