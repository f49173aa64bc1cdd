#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace risa {

enum class Choice { A, B };
enum class Verdict { A, B, Tie };

struct PreferenceTriplet {
  std::string reference;
  std::string candidate_a;
  std::string candidate_b;
  Choice human_choice = Choice::A;
};

/// One JSON object per line: {"reference", "candidate_a", "candidate_b",
/// "human_choice": "a"|"b"}. Relative paths resolve against `base`.
/// ParseError carries the line number; equal candidates are an IntegrityError.
std::vector<PreferenceTriplet> read_preferences(std::istream& in,
                                                const std::filesystem::path& base = {});
std::vector<PreferenceTriplet> load_preferences(const std::filesystem::path& path);

/// Quality of `candidate` judged against `reference`; higher is better.
using Scorer = std::function<double(const std::string& reference, const std::string& candidate)>;

Verdict judge(const Scorer& scorer, const PreferenceTriplet& triplet);

struct ConsistencyReport {
  std::string metric_name;
  double mean_consistency = 0.0;
  double std = 0.0;  // population std over folds
  std::vector<double> fold_values;
  std::size_t n_triplets = 0;
};

struct ConsistencyOptions {
  std::size_t folds = 3;
  /// Shuffle triplets before the contiguous split.
  std::optional<std::uint64_t> shuffle_seed;
};

/// Agreement with the human choice, a tie counting half, per contiguous fold
/// (remainder goes to the last fold). InsufficientData below `folds` triplets.
ConsistencyReport consistency(const Scorer& scorer, const std::vector<PreferenceTriplet>& triplets,
                              const std::string& metric_name,
                              const ConsistencyOptions& options = {});

}  // namespace risa
