#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "risa/core/image.hpp"
#include "risa/encoder/layers.hpp"

namespace risa {

/// D-dimensional style code z.
using StyleCode = std::vector<double>;

struct EncoderConfig {
  /// Number of pre-activation residual blocks.
  std::size_t depth = 6;
  std::size_t base_channels = 16;
  /// Channel count stops doubling here.
  std::size_t max_channels = 128;
  /// The first `downsamples` blocks halve the resolution; requires
  /// downsamples <= depth and side divisible by 2^downsamples.
  std::size_t downsamples = 4;
  std::size_t code_dim = 64;

  bool operator==(const EncoderConfig&) const = default;
};

/// Throws ConfigError when depth or code_dim is zero, or downsamples > depth.
void validate(const EncoderConfig& config);

using ParameterVisitor = std::function<void(const std::string& name, Tensor& tensor)>;
using ConstParameterVisitor = std::function<void(const std::string& name, const Tensor& tensor)>;

struct ResidualBlockTrace {
  Tensor input;
  Tensor act1;    // leaky_relu(input)
  Tensor mid;     // conv1 output, pooled when downsampling
  Tensor act2;    // leaky_relu(mid)
};

/// Activations retained by a forward pass for the matching backward pass.
struct EncoderTrace {
  Tensor image;
  std::vector<ResidualBlockTrace> blocks;
  Tensor final_map;
  std::vector<double> pooled;  // global average of leaky_relu(final_map)
  StyleCode code;
};

/// Style encoder modelled on the StarGAN v2 design: a 3x3 stem, `depth`
/// pre-activation residual blocks (leaky ReLU -> conv, no normalization),
/// leaky ReLU, global average pooling and one fully connected layer.
///
/// An instance is either a parameter set or a gradient accumulator of the same
/// layout (see zeros_like). Const member functions never mutate, so one frozen
/// encoder may serve any number of concurrent readers.
class StyleEncoder {
 public:
  StyleEncoder() = default;
  /// All parameters zero; see trainer's init_model for He initialization.
  explicit StyleEncoder(const EncoderConfig& config);

  const EncoderConfig& config() const noexcept { return config_; }

  /// Throws ShapeError when the image side is not a positive multiple of
  /// 2^downsamples.
  void check_input(std::size_t side) const;

  StyleCode encode(const ImageTensor& image) const;
  EncoderTrace forward(const ImageTensor& image) const;
  /// Accumulates d(loss)/d(params) into `grad` given d(loss)/d(code).
  void backward(const EncoderTrace& trace, std::span<const double> grad_code,
                StyleEncoder& grad) const;

  StyleEncoder zeros_like() const;
  void visit(const ParameterVisitor& visitor);
  void visit(const ConstParameterVisitor& visitor) const;
  std::size_t parameter_count() const;

 private:
  struct ResidualBlock {
    nn::Conv2d conv1;
    nn::Conv2d conv2;
    std::optional<nn::Conv2d> shortcut;
    bool downsample = false;
  };

  Tensor block_forward(const ResidualBlock& block, const Tensor& x, ResidualBlockTrace* trace) const;
  Tensor run(const ImageTensor& image, EncoderTrace* trace) const;

  EncoderConfig config_;
  nn::Conv2d stem_;
  std::vector<ResidualBlock> blocks_;
  nn::Linear head_;
};

/// Stateless wrapper: the style code of one image.
StyleCode encode(const StyleEncoder& encoder, const ImageTensor& image);

/// Element-wise |a - b|, symmetric and non-negative. Throws DimensionError on a
/// length mismatch.
std::vector<double> style_difference(std::span<const double> a, std::span<const double> b);

}  // namespace risa
