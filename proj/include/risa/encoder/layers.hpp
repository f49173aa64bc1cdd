#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "risa/core/tensor.hpp"

// Minimal layer kit with hand-written backward passes. Every forward is a pure
// function of (parameters, input); backward accumulates into a gradient
// object of the same shape as the parameters and returns the input gradient.
namespace risa::nn {

inline constexpr double kLeakySlope = 0.2;

/// Stride-1 "same" convolution, square kernel, zero padding k/2.
struct Conv2d {
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel = 0;
  Tensor weight;  // (out, in, k, k)
  Tensor bias;    // (out) or empty

  Conv2d() = default;
  Conv2d(std::size_t in, std::size_t out, std::size_t k, bool with_bias);
};

Tensor forward(const Conv2d& conv, const Tensor& x);
Tensor backward(const Conv2d& conv, const Tensor& x, const Tensor& grad_out, Conv2d& grad);

struct Linear {
  std::size_t in_features = 0;
  std::size_t out_features = 0;
  Tensor weight;  // (out, in)
  Tensor bias;    // (out)

  Linear() = default;
  Linear(std::size_t in, std::size_t out);
};

std::vector<double> forward(const Linear& layer, std::span<const double> x);
std::vector<double> backward(const Linear& layer, std::span<const double> x,
                             std::span<const double> grad_out, Linear& grad);

Tensor leaky_relu(const Tensor& x);
/// `x` is the forward input.
Tensor leaky_relu_backward(const Tensor& x, const Tensor& grad_out);
std::vector<double> leaky_relu(std::span<const double> x);
std::vector<double> leaky_relu_backward(std::span<const double> x, std::span<const double> grad_out);

/// 2x2 average pooling, stride 2; H and W must be even.
Tensor avg_pool2(const Tensor& x);
Tensor avg_pool2_backward(const Tensor& grad_out);

/// Mean over the spatial axes of a (C, H, W) map.
std::vector<double> global_avg_pool(const Tensor& x);
Tensor global_avg_pool_backward(std::span<const double> grad_out, std::size_t height,
                                std::size_t width);

double sigmoid(double x);

}  // namespace risa::nn
