#include "risa/evalharness/consistency.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <random>

#include <json.hpp>

#include "risa/core/error.hpp"

namespace risa {

namespace {

std::string resolve(const std::string& path, const std::filesystem::path& base) {
  const std::filesystem::path p(path);
  if (base.empty() || p.is_absolute()) return path;
  return (base / p).string();
}

}  // namespace

std::vector<PreferenceTriplet> read_preferences(std::istream& in,
                                                const std::filesystem::path& base) {
  std::vector<PreferenceTriplet> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "preferences line " + std::to_string(line_no) + ": ";
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::Parse, where + e.what());
    }
    if (!j.is_object()) fail(ErrorKind::Parse, where + "expected an object");
    PreferenceTriplet t;
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string& key = it.key();
      if (!it->is_string()) fail(ErrorKind::Parse, where + "\"" + key + "\" must be a string");
      const auto value = it->get<std::string>();
      if (key == "reference") {
        t.reference = resolve(value, base);
      } else if (key == "candidate_a") {
        t.candidate_a = resolve(value, base);
      } else if (key == "candidate_b") {
        t.candidate_b = resolve(value, base);
      } else if (key == "human_choice") {
        if (value == "a") {
          t.human_choice = Choice::A;
        } else if (value == "b") {
          t.human_choice = Choice::B;
        } else {
          fail(ErrorKind::Parse, where + "human_choice must be \"a\" or \"b\"");
        }
      } else {
        fail(ErrorKind::Parse, where + "unknown key \"" + key + "\"");
      }
    }
    for (const char* key : {"reference", "candidate_a", "candidate_b", "human_choice"}) {
      if (!j.contains(key)) fail(ErrorKind::Parse, where + "missing \"" + key + "\"");
    }
    if (t.candidate_a == t.candidate_b) {
      fail(ErrorKind::Integrity, where + "candidate_a and candidate_b are the same image");
    }
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<PreferenceTriplet> load_preferences(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open preference file " + path.string());
  return read_preferences(in, path.parent_path());
}

Verdict judge(const Scorer& scorer, const PreferenceTriplet& triplet) {
  const double a = scorer(triplet.reference, triplet.candidate_a);
  const double b = scorer(triplet.reference, triplet.candidate_b);
  if (std::isnan(a) || std::isnan(b)) fail(ErrorKind::Numeric, "scorer returned NaN");
  if (a > b) return Verdict::A;
  if (b > a) return Verdict::B;
  return Verdict::Tie;
}

ConsistencyReport consistency(const Scorer& scorer, const std::vector<PreferenceTriplet>& triplets,
                              const std::string& metric_name, const ConsistencyOptions& options) {
  const std::size_t folds = options.folds;
  if (folds == 0) fail(ErrorKind::Config, "fold count must be positive");
  if (triplets.size() < folds) {
    fail(ErrorKind::InsufficientData, "consistency needs at least " + std::to_string(folds) +
                                          " triplets, got " + std::to_string(triplets.size()));
  }
  std::vector<std::size_t> order(triplets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (options.shuffle_seed) {
    std::mt19937_64 rng(*options.shuffle_seed);
    std::shuffle(order.begin(), order.end(), rng);
  }

  ConsistencyReport report;
  report.metric_name = metric_name;
  report.n_triplets = triplets.size();
  const std::size_t per_fold = triplets.size() / folds;
  for (std::size_t f = 0; f < folds; ++f) {
    const std::size_t begin = f * per_fold;
    const std::size_t end = f + 1 == folds ? triplets.size() : begin + per_fold;
    double credit = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      const auto& t = triplets[order[i]];
      const Verdict v = judge(scorer, t);
      if (v == Verdict::Tie) {
        credit += 0.5;
      } else if ((v == Verdict::A) == (t.human_choice == Choice::A)) {
        credit += 1.0;
      }
    }
    report.fold_values.push_back(credit / static_cast<double>(end - begin));
  }
  double sum = 0.0;
  for (double v : report.fold_values) sum += v;
  report.mean_consistency = sum / static_cast<double>(folds);
  double var = 0.0;
  for (double v : report.fold_values) var += (v - report.mean_consistency) * (v - report.mean_consistency);
  report.std = std::sqrt(var / static_cast<double>(folds));
  return report;
}

}  // namespace risa
