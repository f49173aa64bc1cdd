#include "risa/dataprep/augment.hpp"

#include <algorithm>
#include <random>

#include "risa/core/error.hpp"

namespace risa {

void validate(const AugmentationSpec& spec) {
  if (!(spec.crop_fraction > 0.0 && spec.crop_fraction <= 1.0)) {
    fail(ErrorKind::Config, "crop_fraction must lie in (0, 1], got " +
                                std::to_string(spec.crop_fraction));
  }
  const auto [lo, hi] = spec.scale_range;
  if (!(lo >= 1.0 && hi >= lo)) {
    fail(ErrorKind::Config, "scale_range must satisfy 1 <= low <= high");
  }
  const auto [clip_lo, clip_hi] = spec.clip_bounds;
  if (!(clip_lo >= 0.0 && clip_hi <= 1.0 && clip_lo < clip_hi)) {
    fail(ErrorKind::Config, "clip_bounds must be a sub-interval of [0, 1]");
  }
}

ImageTensor augment_style_preserving(const ImageTensor& image, const AugmentationSpec& spec,
                                     std::uint64_t draw) {
  validate(spec);
  std::seed_seq seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32),
                    static_cast<std::uint32_t>(draw), static_cast<std::uint32_t>(draw >> 32)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const auto [lo, hi] = spec.scale_range;
  const double scale = lo + (hi - lo) * unit(rng);
  const auto side = static_cast<double>(image.side());
  // Crop of the zoomed frame, expressed in source pixels.
  const double window = side * spec.crop_fraction / scale;
  const double x0 = (side - window) * unit(rng);
  const double y0 = (side - window) * unit(rng);

  Tensor view = resample_window(image, x0, y0, window, image.side());
  const auto [clip_lo, clip_hi] = spec.clip_bounds;
  for (double& v : view.values()) v = std::clamp(v, clip_lo, clip_hi);
  return ImageTensor(std::move(view));
}

void validate(const InterpolationSpec& spec) {
  for (double eps : spec.epsilons) {
    if (!(eps > 0.0 && eps < 1.0)) {
      fail(ErrorKind::Domain, "epsilon " + std::to_string(eps) + " outside (0, 1)");
    }
  }
  if (!(spec.low_label < spec.high_label)) {
    fail(ErrorKind::Domain, "interpolation needs low_label < high_label");
  }
}

Interpolated interpolate(const ImageTensor& low, const ImageTensor& high, QualityLabel y_low,
                         QualityLabel y_high, double epsilon) {
  if (low.side() != high.side()) {
    fail(ErrorKind::Dimension, "cannot interpolate images of side " + std::to_string(low.side()) +
                                   " and " + std::to_string(high.side()));
  }
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    fail(ErrorKind::Domain, "epsilon " + std::to_string(epsilon) + " outside (0, 1)");
  }
  if (!(y_low < y_high)) fail(ErrorKind::Domain, "interpolation needs y_low < y_high");

  Tensor mixed = low.tensor();
  const auto hi = high.values();
  for (std::size_t i = 0; i < mixed.size(); ++i) {
    mixed[i] = epsilon * hi[i] + (1.0 - epsilon) * mixed[i];
  }
  const double y = epsilon * y_high.value() + (1.0 - epsilon) * y_low.value();
  return {ImageTensor::clamped(std::move(mixed)), QualityLabel(y)};
}

}  // namespace risa
