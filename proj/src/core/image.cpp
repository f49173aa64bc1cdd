#include "risa/core/image.hpp"

#include <algorithm>
#include <cmath>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "risa/core/error.hpp"

namespace risa {

ImageTensor::ImageTensor(Tensor pixels) : pixels_(std::move(pixels)) {
  const auto& shape = pixels_.shape();
  if (shape.size() != 3 || shape[0] != kChannels || shape[1] != shape[2] || shape[1] == 0) {
    fail(ErrorKind::Shape, "image tensor must be (3, n, n), got " + shape_string(shape));
  }
  for (double v : pixels_.values()) {
    if (!(v >= 0.0 && v <= 1.0)) {
      fail(ErrorKind::Domain, "image value " + std::to_string(v) + " outside [0, 1]");
    }
  }
  side_ = shape[1];
}

ImageTensor ImageTensor::filled(std::size_t side, double value) {
  return ImageTensor(Tensor({kChannels, side, side}, value));
}

ImageTensor ImageTensor::clamped(Tensor pixels) {
  for (double& v : pixels.values()) {
    if (!std::isnan(v)) v = std::clamp(v, 0.0, 1.0);
  }
  return ImageTensor(std::move(pixels));
}

ImageTensor load_image(const std::filesystem::path& path, std::size_t side) {
  if (side == 0) fail(ErrorKind::Config, "image side must be positive");
  if (!std::filesystem::is_regular_file(path)) {
    fail(ErrorKind::Decode, "cannot open image " + path.string());
  }
  cv::Mat raw;
  try {
    raw = cv::imread(path.string(), cv::IMREAD_COLOR | cv::IMREAD_ANYDEPTH);
  } catch (const cv::Exception& e) {
    fail(ErrorKind::Decode, "cannot decode " + path.string() + ": " + e.what());
  }
  if (raw.empty()) fail(ErrorKind::Decode, "cannot decode image " + path.string());

  double scale = 1.0;
  switch (raw.depth()) {
    case CV_8U: scale = 1.0 / 255.0; break;
    case CV_16U: scale = 1.0 / 65535.0; break;
    default: fail(ErrorKind::Decode, "unsupported pixel depth in " + path.string());
  }
  cv::Mat rgb;
  cv::cvtColor(raw, rgb, cv::COLOR_BGR2RGB);
  cv::Mat unit;
  rgb.convertTo(unit, CV_64FC3, scale);

  const int n = static_cast<int>(side);
  if (unit.rows != n || unit.cols != n) {
    const bool shrinking = unit.rows > n || unit.cols > n;
    cv::Mat resized;
    cv::resize(unit, resized, cv::Size(n, n), 0, 0, shrinking ? cv::INTER_AREA : cv::INTER_LINEAR);
    unit = resized;
  }

  Tensor pixels({ImageTensor::kChannels, side, side});
  for (int y = 0; y < n; ++y) {
    const auto* row = unit.ptr<cv::Vec3d>(y);
    for (int x = 0; x < n; ++x) {
      for (std::size_t c = 0; c < ImageTensor::kChannels; ++c) {
        pixels[(c * side + y) * side + x] = row[x][static_cast<int>(c)];
      }
    }
  }
  return ImageTensor::clamped(std::move(pixels));
}

void save_image(const ImageTensor& image, const std::filesystem::path& path) {
  const int n = static_cast<int>(image.side());
  const bool wide = path.extension() == ".png";
  const double peak = wide ? 65535.0 : 255.0;
  cv::Mat out(n, n, wide ? CV_16UC3 : CV_8UC3);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      for (int c = 0; c < 3; ++c) {
        // OpenCV stores BGR.
        const double v = std::round(image.at(2 - c, y, x) * peak);
        if (wide) {
          out.at<cv::Vec3w>(y, x)[c] = static_cast<std::uint16_t>(v);
        } else {
          out.at<cv::Vec3b>(y, x)[c] = static_cast<std::uint8_t>(v);
        }
      }
    }
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), out);
  } catch (const cv::Exception& e) {
    fail(ErrorKind::Io, "cannot write " + path.string() + ": " + e.what());
  }
  if (!ok) fail(ErrorKind::Io, "cannot write " + path.string());
}

Tensor resample_window(const ImageTensor& image, double x0, double y0, double window,
                       std::size_t out_side) {
  const std::size_t n = image.side();
  const double step = window / static_cast<double>(out_side);
  const auto max_index = static_cast<double>(n - 1);
  Tensor out({ImageTensor::kChannels, out_side, out_side});
  for (std::size_t i = 0; i < out_side; ++i) {
    const double sy = std::clamp(y0 + (static_cast<double>(i) + 0.5) * step - 0.5, 0.0, max_index);
    const auto ya = static_cast<std::size_t>(std::floor(sy));
    const std::size_t yb = std::min(ya + 1, n - 1);
    const double fy = sy - static_cast<double>(ya);
    for (std::size_t j = 0; j < out_side; ++j) {
      const double sx =
          std::clamp(x0 + (static_cast<double>(j) + 0.5) * step - 0.5, 0.0, max_index);
      const auto xa = static_cast<std::size_t>(std::floor(sx));
      const std::size_t xb = std::min(xa + 1, n - 1);
      const double fx = sx - static_cast<double>(xa);
      for (std::size_t c = 0; c < ImageTensor::kChannels; ++c) {
        const double top = image.at(c, ya, xa) * (1.0 - fx) + image.at(c, ya, xb) * fx;
        const double bottom = image.at(c, yb, xa) * (1.0 - fx) + image.at(c, yb, xb) * fx;
        out[(c * out_side + i) * out_side + j] = top * (1.0 - fy) + bottom * fy;
      }
    }
  }
  return out;
}

}  // namespace risa
