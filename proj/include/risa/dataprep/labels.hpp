#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <vector>

#include "risa/core/types.hpp"

namespace risa {

/// A harvested generator checkpoint: its training iteration and its 1-based
/// rank among the J harvested checkpoints.
struct IterationTag {
  std::int64_t iteration = 0;
  std::size_t checkpoint_index = 1;
};

/// Checkpoints 1..boundary_index form the initial stage; the boundary
/// checkpoint itself provides the low end of the interpolation.
struct StageBoundary {
  std::size_t boundary_index = 1;
  bool operator==(const StageBoundary&) const = default;
};

struct FidPoint {
  double iteration = 0.0;
  double fid = 0.0;
};

/// Sorts distinct iterations ascending and numbers them 1..J.
std::vector<IterationTag> tag_checkpoints(const std::vector<std::int64_t>& iterations);

/// Initial-stage checkpoint j (j <= boundary) gets (j-1)/K; the converged
/// checkpoint J gets (K-1)/K. Stable-stage checkpoints in between get no
/// label. Throws ConfigError when boundary is not in [1, J) or when the
/// initial stage needs more than K-1 levels, and IntegrityError when
/// checkpoint order disagrees with iteration order.
std::map<std::size_t, QualityLabel> assign_vanilla_labels(const std::vector<IterationTag>& tags,
                                                          std::size_t num_classifiers,
                                                          StageBoundary boundary);

/// Elbow of an FID curve: the point with the largest perpendicular distance
/// to the chord joining the first and last points (ties go to the smallest
/// index). Returns the 1-based index of that point. An override is returned
/// verbatim. Throws InsufficientData for fewer than 3 points and ParseError
/// for non-increasing iterations.
StageBoundary detect_stage_boundary(const std::vector<FidPoint>& curve,
                                    std::optional<std::size_t> override_index = std::nullopt);

/// Two-column CSV (iteration, fid); a non-numeric first line is a header.
std::vector<FidPoint> read_fid_curve(const std::filesystem::path& path);

/// Maps the elbow of a curve sampled at arbitrary iterations onto the
/// harvested checkpoints: the last checkpoint whose iteration does not exceed
/// the elbow iteration, kept within [1, J-1].
StageBoundary boundary_for_checkpoints(const std::vector<FidPoint>& curve,
                                       const std::vector<IterationTag>& tags);

}  // namespace risa
