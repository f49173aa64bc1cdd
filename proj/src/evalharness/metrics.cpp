#include "risa/evalharness/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "risa/core/error.hpp"

namespace risa {

namespace {

constexpr int kRadius = 5;  // 11-tap window
constexpr double kSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;
constexpr std::array<double, 5> kScaleWeights = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};

void check_same(const ImageTensor& a, const ImageTensor& b) {
  if (a.side() != b.side()) {
    fail(ErrorKind::Dimension, "image sides differ: " + std::to_string(a.side()) + " vs " +
                                   std::to_string(b.side()));
  }
}

std::array<double, 2 * kRadius + 1> gaussian_taps() {
  std::array<double, 2 * kRadius + 1> w{};
  double sum = 0.0;
  for (int i = -kRadius; i <= kRadius; ++i) {
    w[i + kRadius] = std::exp(-0.5 * i * i / (kSigma * kSigma));
    sum += w[i + kRadius];
  }
  for (double& v : w) v /= sum;
  return w;
}

// Valid-region separable filter of a side x side plane.
std::vector<double> filter_valid(const std::vector<double>& plane, std::size_t side) {
  static const auto taps = gaussian_taps();
  const std::size_t out = side - 2 * kRadius;
  std::vector<double> rows(side * out);
  for (std::size_t y = 0; y < side; ++y) {
    for (std::size_t x = 0; x < out; ++x) {
      double acc = 0.0;
      for (std::size_t t = 0; t < taps.size(); ++t) acc += taps[t] * plane[y * side + x + t];
      rows[y * out + x] = acc;
    }
  }
  std::vector<double> result(out * out);
  for (std::size_t y = 0; y < out; ++y) {
    for (std::size_t x = 0; x < out; ++x) {
      double acc = 0.0;
      for (std::size_t t = 0; t < taps.size(); ++t) acc += taps[t] * rows[(y + t) * out + x];
      result[y * out + x] = acc;
    }
  }
  return result;
}

struct SsimParts {
  double ssim;
  double cs;
};

SsimParts ssim_plane(const std::vector<double>& a, const std::vector<double>& b, std::size_t side) {
  if (side < 2 * kRadius + 1) {
    fail(ErrorKind::Config, "SSIM needs images of at least 11x11, got " + std::to_string(side));
  }
  std::vector<double> aa(a.size()), bb(a.size()), ab(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    aa[i] = a[i] * a[i];
    bb[i] = b[i] * b[i];
    ab[i] = a[i] * b[i];
  }
  const auto mu_a = filter_valid(a, side);
  const auto mu_b = filter_valid(b, side);
  const auto e_aa = filter_valid(aa, side);
  const auto e_bb = filter_valid(bb, side);
  const auto e_ab = filter_valid(ab, side);
  double ssim_sum = 0.0;
  double cs_sum = 0.0;
  for (std::size_t i = 0; i < mu_a.size(); ++i) {
    const double var_a = e_aa[i] - mu_a[i] * mu_a[i];
    const double var_b = e_bb[i] - mu_b[i] * mu_b[i];
    const double cov = e_ab[i] - mu_a[i] * mu_b[i];
    const double cs = (2.0 * cov + kC2) / (var_a + var_b + kC2);
    const double lum = (2.0 * mu_a[i] * mu_b[i] + kC1) /
                       (mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + kC1);
    ssim_sum += lum * cs;
    cs_sum += cs;
  }
  const auto n = static_cast<double>(mu_a.size());
  return {ssim_sum / n, cs_sum / n};
}

std::vector<double> plane_copy(const ImageTensor& image, std::size_t c) {
  const auto p = image.plane(c);
  return {p.begin(), p.end()};
}

std::vector<double> pool2(const std::vector<double>& plane, std::size_t side) {
  const std::size_t half = side / 2;
  std::vector<double> out(half * half);
  for (std::size_t y = 0; y < half; ++y) {
    for (std::size_t x = 0; x < half; ++x) {
      const std::size_t i = 2 * y * side + 2 * x;
      out[y * half + x] = 0.25 * (plane[i] + plane[i + 1] + plane[i + side] + plane[i + side + 1]);
    }
  }
  return out;
}

std::vector<double> ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

double psnr(const ImageTensor& a, const ImageTensor& b) {
  check_same(a, b);
  const auto va = a.values();
  const auto vb = b.values();
  double se = 0.0;
  for (std::size_t i = 0; i < va.size(); ++i) se += (va[i] - vb[i]) * (va[i] - vb[i]);
  const double mse = se / static_cast<double>(va.size());
  if (mse == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, -10.0 * std::log10(mse));
}

double ssim(const ImageTensor& a, const ImageTensor& b) {
  check_same(a, b);
  double sum = 0.0;
  for (std::size_t c = 0; c < ImageTensor::kChannels; ++c) {
    sum += ssim_plane(plane_copy(a, c), plane_copy(b, c), a.side()).ssim;
  }
  return sum / static_cast<double>(ImageTensor::kChannels);
}

double ms_ssim(const ImageTensor& a, const ImageTensor& b) {
  check_same(a, b);
  const std::size_t scales = kScaleWeights.size();
  const std::size_t min_side = (std::size_t{1} << (scales - 1)) * (2 * kRadius + 1);
  if (a.side() < min_side) {
    fail(ErrorKind::Config, "MS-SSIM needs side >= " + std::to_string(min_side) + ", got " +
                                std::to_string(a.side()));
  }
  double sum = 0.0;
  for (std::size_t c = 0; c < ImageTensor::kChannels; ++c) {
    auto pa = plane_copy(a, c);
    auto pb = plane_copy(b, c);
    std::size_t side = a.side();
    double value = 1.0;
    for (std::size_t s = 0; s < scales; ++s) {
      const SsimParts parts = ssim_plane(pa, pb, side);
      if (s + 1 == scales) {
        value *= std::pow(std::max(parts.ssim, 0.0), kScaleWeights[s]);
      } else {
        value *= std::pow(std::max(parts.cs, 0.0), kScaleWeights[s]);
        pa = pool2(pa, side);
        pb = pool2(pb, side);
        side /= 2;
      }
    }
    sum += value;
  }
  return sum / static_cast<double>(ImageTensor::kChannels);
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) fail(ErrorKind::Dimension, "spearman: length mismatch");
  if (x.size() < 2) fail(ErrorKind::InsufficientData, "spearman needs at least 2 points");
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  const double mean = 0.5 * static_cast<double>(x.size() + 1);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mean) * (ry[i] - mean);
    sxx += (rx[i] - mean) * (rx[i] - mean);
    syy += (ry[i] - mean) * (ry[i] - mean);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace risa
