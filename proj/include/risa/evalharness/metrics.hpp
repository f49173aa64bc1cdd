#pragma once

#include <span>
#include <vector>

#include "risa/core/image.hpp"

namespace risa {

inline constexpr double kPsnrCap = 100.0;

/// 10 log10(1 / MSE) in dB, capped at kPsnrCap. DimensionError on a size
/// mismatch.
double psnr(const ImageTensor& a, const ImageTensor& b);

/// Gaussian-window SSIM (11x11, sigma 1.5, K1 0.01, K2 0.03, data range 1)
/// averaged over the valid region and the three channels.
double ssim(const ImageTensor& a, const ImageTensor& b);

/// 5-scale MS-SSIM with the usual exponents; needs side >= 176 (ConfigError).
double ms_ssim(const ImageTensor& a, const ImageTensor& b);

/// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> x, std::span<const double> y);

}  // namespace risa
