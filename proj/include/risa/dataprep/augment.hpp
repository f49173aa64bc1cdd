#pragma once

#include <cstdint>
#include <utility>

#include "risa/core/image.hpp"
#include "risa/core/types.hpp"

namespace risa {

/// Style-preserving view generator: zoom in by a factor drawn from
/// scale_range, crop crop_fraction of the zoomed frame at a random offset,
/// resize back to the input side, clamp values to clip_bounds.
struct AugmentationSpec {
  std::pair<double, double> scale_range = {1.0, 1.25};
  double crop_fraction = 0.9;
  std::pair<double, double> clip_bounds = {0.0, 1.0};
  std::uint64_t seed = 0;

  bool operator==(const AugmentationSpec&) const = default;
};

/// Throws ConfigError for crop_fraction outside (0, 1], a scale range that is
/// empty or below 1, or clip bounds outside [0, 1].
void validate(const AugmentationSpec& spec);

/// Deterministic in (spec.seed, draw); output has the input's shape.
ImageTensor augment_style_preserving(const ImageTensor& image, const AugmentationSpec& spec,
                                     std::uint64_t draw);

struct InterpolationSpec {
  std::vector<double> epsilons = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  QualityLabel low_label;
  QualityLabel high_label{1.0};
};

/// Throws DomainError for any epsilon outside (0, 1) or low_label >= high_label.
void validate(const InterpolationSpec& spec);

struct Interpolated {
  ImageTensor image;
  QualityLabel label;
};

/// I = eps * I_high + (1 - eps) * I_low and y = eps * y_high + (1 - eps) * y_low.
/// Throws DimensionError on a size mismatch and DomainError when eps is not in
/// (0, 1) or y_low >= y_high.
Interpolated interpolate(const ImageTensor& low, const ImageTensor& high, QualityLabel y_low,
                         QualityLabel y_high, double epsilon);

}  // namespace risa
