#include "risa/dataprep/labels.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "risa/core/error.hpp"

namespace risa {

std::vector<IterationTag> tag_checkpoints(const std::vector<std::int64_t>& iterations) {
  const std::set<std::int64_t> distinct(iterations.begin(), iterations.end());
  std::vector<IterationTag> tags;
  std::size_t index = 1;
  for (std::int64_t it : distinct) tags.push_back({it, index++});
  return tags;
}

std::map<std::size_t, QualityLabel> assign_vanilla_labels(const std::vector<IterationTag>& tags,
                                                          std::size_t num_classifiers,
                                                          StageBoundary boundary) {
  if (num_classifiers < 2) fail(ErrorKind::Config, "need K >= 2");
  const std::size_t total = tags.size();
  if (total < 2) fail(ErrorKind::Config, "need at least 2 checkpoints, got " + std::to_string(total));
  if (boundary.boundary_index < 1 || boundary.boundary_index >= total) {
    fail(ErrorKind::Config, "stage boundary " + std::to_string(boundary.boundary_index) +
                                " must lie in [1, " + std::to_string(total) + ")");
  }
  if (boundary.boundary_index > num_classifiers - 1) {
    fail(ErrorKind::Config, std::to_string(boundary.boundary_index) +
                                " initial-stage checkpoints exceed the " +
                                std::to_string(num_classifiers - 1) + " available label levels");
  }
  auto sorted = tags;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.checkpoint_index < b.checkpoint_index; });
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (sorted[i].checkpoint_index != i + 1) {
      fail(ErrorKind::Integrity, "checkpoint indices must be exactly 1..J");
    }
    if (i > 0 && sorted[i].iteration <= sorted[i - 1].iteration) {
      fail(ErrorKind::Integrity, "checkpoint order disagrees with iteration order");
    }
  }

  const auto k_total = static_cast<double>(num_classifiers);
  std::map<std::size_t, QualityLabel> labels;
  for (std::size_t j = 1; j <= boundary.boundary_index; ++j) {
    labels.emplace(j, QualityLabel(static_cast<double>(j - 1) / k_total));
  }
  labels.emplace(total, QualityLabel(static_cast<double>(num_classifiers - 1) / k_total));
  return labels;
}

StageBoundary detect_stage_boundary(const std::vector<FidPoint>& curve,
                                    std::optional<std::size_t> override_index) {
  if (override_index) return StageBoundary{*override_index};
  if (curve.size() < 3) {
    fail(ErrorKind::InsufficientData,
         "elbow detection needs at least 3 points, got " + std::to_string(curve.size()));
  }
  for (std::size_t i = 1; i < curve.size(); ++i) {
    if (!(curve[i].iteration > curve[i - 1].iteration)) {
      fail(ErrorKind::Parse, "FID curve iterations must be strictly increasing");
    }
  }
  const FidPoint& a = curve.front();
  const FidPoint& b = curve.back();
  const double dx = b.iteration - a.iteration;
  const double dy = b.fid - a.fid;
  const double chord = std::hypot(dx, dy);
  std::size_t best = 0;
  double best_distance = -1.0;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const double cross = dy * (curve[i].iteration - a.iteration) - dx * (curve[i].fid - a.fid);
    const double distance = std::abs(cross) / chord;
    if (distance > best_distance) {
      best_distance = distance;
      best = i;
    }
  }
  return StageBoundary{best + 1};
}

std::vector<FidPoint> read_fid_curve(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open FID curve " + path.string());
  std::vector<FidPoint> curve;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    FidPoint p;
    if (!(fields >> p.iteration >> p.fid)) {
      if (line_number == 1) continue;  // header
      fail(ErrorKind::Parse, path.string() + " line " + std::to_string(line_number) +
                                 ": expected 'iteration,fid'");
    }
    curve.push_back(p);
  }
  return curve;
}

StageBoundary boundary_for_checkpoints(const std::vector<FidPoint>& curve,
                                       const std::vector<IterationTag>& tags) {
  if (tags.size() < 2) fail(ErrorKind::Config, "need at least 2 checkpoints");
  const StageBoundary elbow = detect_stage_boundary(curve);
  const double elbow_iteration = curve[elbow.boundary_index - 1].iteration;
  std::size_t index = 1;
  for (const auto& tag : tags) {
    if (static_cast<double>(tag.iteration) <= elbow_iteration) {
      index = std::max(index, tag.checkpoint_index);
    }
  }
  return StageBoundary{std::min(index, tags.size() - 1)};
}

}  // namespace risa
