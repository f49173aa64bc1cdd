#include "risa/encoder/layers.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Core>

#include "risa/core/error.hpp"

namespace risa::nn {

namespace {

struct Extent {
  std::size_t begin;
  std::size_t end;
};

// Output rows/cols whose tap at `offset` lands inside [0, n).
Extent valid_range(std::size_t n, std::ptrdiff_t offset) {
  const auto signed_n = static_cast<std::ptrdiff_t>(n);
  const std::ptrdiff_t begin = std::max<std::ptrdiff_t>(0, -offset);
  const std::ptrdiff_t end = std::min<std::ptrdiff_t>(signed_n, signed_n - offset);
  if (end <= begin) return {0, 0};
  return {static_cast<std::size_t>(begin), static_cast<std::size_t>(end)};
}

void check_input(const Conv2d& conv, const Tensor& x) {
  if (x.rank() != 3 || x.dim(0) != conv.in_channels) {
    fail(ErrorKind::Dimension, "conv expects " + std::to_string(conv.in_channels) +
                                   " input channels, got tensor " + shape_string(x.shape()));
  }
}

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Products only ever see Eigen-owned (aligned) storage: on mapped buffers the
// vectorized kernels peel by address, which changes the summation order from
// one allocation to the next and breaks run-to-run reproducibility.
RowMatrix as_matrix(const Tensor& t, std::size_t rows) {
  const auto r = static_cast<Eigen::Index>(rows);
  return RowMatrix::ConstMapType(t.data(), r, static_cast<Eigen::Index>(t.size()) / r);
}

void copy_out(const RowMatrix& m, Tensor& t) { std::copy_n(m.data(), m.size(), t.data()); }

// Row (i, ky, kx) holds input channel i shifted by the tap offset, zero
// outside the image.
RowMatrix im2col(const Conv2d& conv, const Tensor& x) {
  const std::size_t h = x.dim(1), w = x.dim(2), hw = h * w, k = conv.kernel;
  const auto pad = static_cast<std::ptrdiff_t>(k / 2);
  RowMatrix cols = RowMatrix::Zero(conv.in_channels * k * k, hw);
  for (std::size_t i = 0; i < conv.in_channels; ++i) {
    const double* in_plane = x.data() + i * hw;
    for (std::size_t ky = 0; ky < k; ++ky) {
      const auto oy = static_cast<std::ptrdiff_t>(ky) - pad;
      const Extent rows = valid_range(h, oy);
      for (std::size_t kx = 0; kx < k; ++kx) {
        const auto ox = static_cast<std::ptrdiff_t>(kx) - pad;
        const Extent span = valid_range(w, ox);
        double* dst = cols.data() + ((i * k + ky) * k + kx) * hw;
        for (std::size_t r = rows.begin; r < rows.end; ++r) {
          const double* src = in_plane + (static_cast<std::ptrdiff_t>(r) + oy) * static_cast<std::ptrdiff_t>(w) + ox;
          for (std::size_t c = span.begin; c < span.end; ++c) dst[r * w + c] = src[c];
        }
      }
    }
  }
  return cols;
}

Tensor col2im(const Conv2d& conv, const RowMatrix& cols, std::size_t h, std::size_t w) {
  const std::size_t hw = h * w, k = conv.kernel;
  const auto pad = static_cast<std::ptrdiff_t>(k / 2);
  Tensor x({conv.in_channels, h, w});
  for (std::size_t i = 0; i < conv.in_channels; ++i) {
    double* plane = x.data() + i * hw;
    for (std::size_t ky = 0; ky < k; ++ky) {
      const auto oy = static_cast<std::ptrdiff_t>(ky) - pad;
      const Extent rows = valid_range(h, oy);
      for (std::size_t kx = 0; kx < k; ++kx) {
        const auto ox = static_cast<std::ptrdiff_t>(kx) - pad;
        const Extent span = valid_range(w, ox);
        const double* src = cols.data() + ((i * k + ky) * k + kx) * hw;
        for (std::size_t r = rows.begin; r < rows.end; ++r) {
          double* dst = plane + (static_cast<std::ptrdiff_t>(r) + oy) * static_cast<std::ptrdiff_t>(w) + ox;
          for (std::size_t c = span.begin; c < span.end; ++c) dst[c] += src[r * w + c];
        }
      }
    }
  }
  return x;
}

}  // namespace

Conv2d::Conv2d(std::size_t in, std::size_t out, std::size_t k, bool with_bias)
    : in_channels(in), out_channels(out), kernel(k), weight({out, in, k, k}) {
  if (with_bias) bias = Tensor({out});
}

Tensor forward(const Conv2d& conv, const Tensor& x) {
  check_input(conv, x);
  const std::size_t h = x.dim(1), w = x.dim(2);
  const auto cols = im2col(conv, x);
  Tensor y({conv.out_channels, h, w});
  RowMatrix out = as_matrix(conv.weight, conv.out_channels) * cols;
  if (!conv.bias.empty()) {
    for (std::size_t o = 0; o < conv.out_channels; ++o) out.row(o).array() += conv.bias[o];
  }
  copy_out(out, y);
  return y;
}

Tensor backward(const Conv2d& conv, const Tensor& x, const Tensor& grad_out, Conv2d& grad) {
  check_input(conv, x);
  const std::size_t h = x.dim(1), w = x.dim(2);
  const RowMatrix g = as_matrix(grad_out, conv.out_channels);
  if (!conv.bias.empty()) {
    for (std::size_t o = 0; o < conv.out_channels; ++o) grad.bias[o] += g.row(o).sum();
  }
  const auto cols = im2col(conv, x);
  RowMatrix gw = as_matrix(grad.weight, conv.out_channels);
  gw.noalias() += g * cols.transpose();
  copy_out(gw, grad.weight);
  const RowMatrix gcols = as_matrix(conv.weight, conv.out_channels).transpose() * g;
  return col2im(conv, gcols, h, w);
}

Linear::Linear(std::size_t in, std::size_t out)
    : in_features(in), out_features(out), weight({out, in}), bias({out}) {}

std::vector<double> forward(const Linear& layer, std::span<const double> x) {
  if (x.size() != layer.in_features) {
    fail(ErrorKind::Dimension, "linear layer expects " + std::to_string(layer.in_features) +
                                   " inputs, got " + std::to_string(x.size()));
  }
  std::vector<double> y(layer.out_features);
  for (std::size_t o = 0; o < layer.out_features; ++o) {
    const double* row = layer.weight.data() + o * layer.in_features;
    double acc = layer.bias[o];
    for (std::size_t i = 0; i < layer.in_features; ++i) acc += row[i] * x[i];
    y[o] = acc;
  }
  return y;
}

std::vector<double> backward(const Linear& layer, std::span<const double> x,
                             std::span<const double> grad_out, Linear& grad) {
  std::vector<double> grad_in(layer.in_features, 0.0);
  for (std::size_t o = 0; o < layer.out_features; ++o) {
    const double g = grad_out[o];
    const double* row = layer.weight.data() + o * layer.in_features;
    double* grow = grad.weight.data() + o * layer.in_features;
    grad.bias[o] += g;
    for (std::size_t i = 0; i < layer.in_features; ++i) {
      grow[i] += g * x[i];
      grad_in[i] += g * row[i];
    }
  }
  return grad_in;
}

Tensor leaky_relu(const Tensor& x) {
  Tensor y = x;
  for (double& v : y.values()) v = v > 0.0 ? v : kLeakySlope * v;
  return y;
}

Tensor leaky_relu_backward(const Tensor& x, const Tensor& grad_out) {
  Tensor g = grad_out;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!(x[i] > 0.0)) g[i] *= kLeakySlope;
  }
  return g;
}

std::vector<double> leaky_relu(std::span<const double> x) {
  std::vector<double> y(x.begin(), x.end());
  for (double& v : y) v = v > 0.0 ? v : kLeakySlope * v;
  return y;
}

std::vector<double> leaky_relu_backward(std::span<const double> x,
                                        std::span<const double> grad_out) {
  std::vector<double> g(grad_out.begin(), grad_out.end());
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!(x[i] > 0.0)) g[i] *= kLeakySlope;
  }
  return g;
}

Tensor avg_pool2(const Tensor& x) {
  const std::size_t c = x.dim(0), h = x.dim(1), w = x.dim(2);
  if (h % 2 != 0 || w % 2 != 0) {
    fail(ErrorKind::Shape, "average pooling needs even spatial size, got " + shape_string(x.shape()));
  }
  const std::size_t oh = h / 2, ow = w / 2;
  Tensor y({c, oh, ow});
  for (std::size_t ch = 0; ch < c; ++ch) {
    const double* src = x.data() + ch * h * w;
    double* dst = y.data() + ch * oh * ow;
    for (std::size_t r = 0; r < oh; ++r) {
      const double* top = src + 2 * r * w;
      const double* bottom = top + w;
      for (std::size_t q = 0; q < ow; ++q) {
        dst[r * ow + q] = 0.25 * (top[2 * q] + top[2 * q + 1] + bottom[2 * q] + bottom[2 * q + 1]);
      }
    }
  }
  return y;
}

Tensor avg_pool2_backward(const Tensor& grad_out) {
  const std::size_t c = grad_out.dim(0), oh = grad_out.dim(1), ow = grad_out.dim(2);
  const std::size_t h = oh * 2, w = ow * 2;
  Tensor g({c, h, w});
  for (std::size_t ch = 0; ch < c; ++ch) {
    const double* src = grad_out.data() + ch * oh * ow;
    double* dst = g.data() + ch * h * w;
    for (std::size_t r = 0; r < h; ++r) {
      for (std::size_t q = 0; q < w; ++q) dst[r * w + q] = 0.25 * src[(r / 2) * ow + q / 2];
    }
  }
  return g;
}

std::vector<double> global_avg_pool(const Tensor& x) {
  const std::size_t c = x.dim(0), hw = x.dim(1) * x.dim(2);
  std::vector<double> y(c);
  for (std::size_t ch = 0; ch < c; ++ch) {
    const double* src = x.data() + ch * hw;
    double acc = 0.0;
    for (std::size_t p = 0; p < hw; ++p) acc += src[p];
    y[ch] = acc / static_cast<double>(hw);
  }
  return y;
}

Tensor global_avg_pool_backward(std::span<const double> grad_out, std::size_t height,
                                std::size_t width) {
  const std::size_t hw = height * width;
  Tensor g({grad_out.size(), height, width});
  for (std::size_t ch = 0; ch < grad_out.size(); ++ch) {
    std::fill(g.data() + ch * hw, g.data() + (ch + 1) * hw, grad_out[ch] / static_cast<double>(hw));
  }
  return g;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace risa::nn
