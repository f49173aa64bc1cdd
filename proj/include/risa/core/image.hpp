#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "risa/core/tensor.hpp"

namespace risa {

/// Square RGB image, channel-major (3, side, side), values in [0, 1].
/// The invariants are checked on construction, so any ImageTensor in hand is
/// valid.
class ImageTensor {
 public:
  static constexpr std::size_t kChannels = 3;

  ImageTensor() = default;
  /// Throws ShapeError for a non-square or non-RGB tensor and DomainError for
  /// values outside [0, 1] or non-finite values.
  explicit ImageTensor(Tensor pixels);

  static ImageTensor filled(std::size_t side, double value);
  /// Clamps into [0, 1] before validation; NaN still raises DomainError.
  static ImageTensor clamped(Tensor pixels);

  std::size_t side() const noexcept { return side_; }
  std::size_t channels() const noexcept { return kChannels; }
  std::size_t plane_size() const noexcept { return side_ * side_; }
  std::size_t size() const noexcept { return pixels_.size(); }

  double at(std::size_t c, std::size_t y, std::size_t x) const {
    return pixels_[(c * side_ + y) * side_ + x];
  }
  std::span<const double> values() const noexcept { return pixels_.values(); }
  std::span<const double> plane(std::size_t c) const {
    return values().subspan(c * plane_size(), plane_size());
  }
  const Tensor& tensor() const noexcept { return pixels_; }

  bool operator==(const ImageTensor&) const = default;

 private:
  Tensor pixels_;
  std::size_t side_ = 0;
};

/// Decodes a PNG/JPEG file (8- or 16-bit), converts to RGB in [0,1] and
/// resizes to side x side. Non-square inputs are stretched.
ImageTensor load_image(const std::filesystem::path& path, std::size_t side);

/// Writes a 16-bit PNG (8-bit for other extensions).
void save_image(const ImageTensor& image, const std::filesystem::path& path);

/// Bilinear resample of the window [x0, x0+w) x [y0, y0+w), in source pixel
/// units, onto an out_side x out_side grid. Pixel centres sit at i + 0.5.
Tensor resample_window(const ImageTensor& image, double x0, double y0, double window,
                       std::size_t out_side);

}  // namespace risa
