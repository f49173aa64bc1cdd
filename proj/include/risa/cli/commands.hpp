#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "risa/cli/run_config.hpp"
#include "risa/core/error.hpp"
#include "risa/evalharness/consistency.hpp"

namespace risa::cli {

/// 0 success, 1 usage or config, 2 data integrity, 3 numeric failure.
int exit_code(ErrorKind kind);

/// Where a run's artifacts live inside its output directory.
struct RunLayout {
  std::filesystem::path root;

  std::filesystem::path ladder_dir() const { return root / "ladder"; }
  std::filesystem::path ladder_manifest() const { return root / "ladder" / "manifest.jsonl"; }
  std::filesystem::path prepared_manifest() const { return root / "prepared" / "manifest.jsonl"; }
  std::filesystem::path prepared_images() const { return root / "prepared" / "images"; }
  std::filesystem::path checkpoint() const { return root / "checkpoint.risa"; }
  std::filesystem::path epoch_checkpoint(std::size_t epoch) const;
  std::filesystem::path train_log() const { return root / "train_log.csv"; }
  std::filesystem::path resolved_config() const { return root / "config.json"; }
};

struct PrepareResult {
  std::filesystem::path manifest;
  std::size_t boundary_index = 0;
  std::map<double, std::size_t> level_counts;
};

/// Builds (or reads) the checkpoint manifest, picks the stage boundary and
/// writes the labeled training manifest. Prints the per-level counts.
PrepareResult cmd_prepare(const RunConfig& config, const RunLayout& layout, std::ostream& out);

/// Trains on the prepared manifest; returns the final checkpoint path.
std::filesystem::path cmd_train(const RunConfig& config, const RunLayout& layout,
                                const std::optional<std::filesystem::path>& resume,
                                std::ostream& out);

double cmd_score(const std::filesystem::path& checkpoint, const std::filesystem::path& reference,
                 const std::filesystem::path& generated, std::ostream& out);

struct EvalRequest {
  std::optional<std::filesystem::path> checkpoint;
  std::filesystem::path preferences;
  std::vector<std::string> baselines;  // psnr, ssim, ms_ssim
  std::optional<std::uint64_t> shuffle_seed;
  std::size_t image_side = 32;         // used when no checkpoint is given
  std::filesystem::path report_stem;   // empty: no files
};

struct EvalResult {
  std::vector<ConsistencyReport> reports;
  /// First failure among the requested metrics, if any.
  std::optional<Error> failure;
};

/// Runs every requested metric; a failing metric is reported and skipped so
/// the others still complete.
EvalResult cmd_eval(const EvalRequest& request, std::ostream& out, std::ostream& err);

/// Merges report CSVs into one table and chart at `stem`.
std::vector<ConsistencyReport> cmd_report(const std::vector<std::filesystem::path>& inputs,
                                          const std::filesystem::path& stem, std::ostream& out);

void print_table(const std::vector<ConsistencyReport>& reports, std::ostream& out);

}  // namespace risa::cli
