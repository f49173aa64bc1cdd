#include "risa/encoder/style_encoder.hpp"

#include <algorithm>
#include <cmath>

#include "risa/core/error.hpp"

namespace risa {

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

void add_into(Tensor& dst, const Tensor& src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

}  // namespace

void validate(const EncoderConfig& config) {
  if (config.depth < 1) fail(ErrorKind::Config, "encoder depth must be >= 1");
  if (config.code_dim < 1) fail(ErrorKind::Config, "encoder code_dim must be >= 1");
  if (config.base_channels < 1) fail(ErrorKind::Config, "encoder base_channels must be >= 1");
  if (config.max_channels < config.base_channels) {
    fail(ErrorKind::Config, "encoder max_channels must be >= base_channels");
  }
  if (config.downsamples > config.depth) {
    fail(ErrorKind::Config, "encoder downsamples cannot exceed depth");
  }
}

StyleEncoder::StyleEncoder(const EncoderConfig& config) : config_(config) {
  validate(config_);
  stem_ = nn::Conv2d(ImageTensor::kChannels, config_.base_channels, 3, true);
  std::size_t channels = config_.base_channels;
  for (std::size_t b = 0; b < config_.depth; ++b) {
    ResidualBlock block;
    block.downsample = b < config_.downsamples;
    const std::size_t out =
        block.downsample ? std::min(channels * 2, config_.max_channels) : channels;
    block.conv1 = nn::Conv2d(channels, channels, 3, true);
    block.conv2 = nn::Conv2d(channels, out, 3, true);
    if (out != channels) block.shortcut = nn::Conv2d(channels, out, 1, false);
    blocks_.push_back(std::move(block));
    channels = out;
  }
  head_ = nn::Linear(channels, config_.code_dim);
}

void StyleEncoder::check_input(std::size_t side) const {
  const std::size_t factor = std::size_t{1} << config_.downsamples;
  if (side == 0 || side % factor != 0) {
    fail(ErrorKind::Shape, "image side " + std::to_string(side) + " is incompatible with " +
                               std::to_string(config_.downsamples) +
                               " downsampling blocks (needs a multiple of " +
                               std::to_string(factor) + ")");
  }
}

Tensor StyleEncoder::block_forward(const ResidualBlock& block, const Tensor& x,
                                   ResidualBlockTrace* trace) const {
  Tensor act1 = nn::leaky_relu(x);
  Tensor mid = nn::forward(block.conv1, act1);
  if (block.downsample) mid = nn::avg_pool2(mid);
  Tensor act2 = nn::leaky_relu(mid);
  Tensor out = nn::forward(block.conv2, act2);

  Tensor skip = block.shortcut ? nn::forward(*block.shortcut, x) : x;
  if (block.downsample) skip = nn::avg_pool2(skip);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (out[i] + skip[i]) * kInvSqrt2;

  if (trace) {
    trace->input = x;
    trace->act1 = std::move(act1);
    trace->mid = std::move(mid);
    trace->act2 = std::move(act2);
  }
  return out;
}

Tensor StyleEncoder::run(const ImageTensor& image, EncoderTrace* trace) const {
  check_input(image.side());
  Tensor h = nn::forward(stem_, image.tensor());
  if (trace) {
    trace->image = image.tensor();
    trace->blocks.resize(blocks_.size());
  }
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    h = block_forward(blocks_[b], h, trace ? &trace->blocks[b] : nullptr);
  }
  return h;
}

StyleCode StyleEncoder::encode(const ImageTensor& image) const {
  const Tensor final_map = run(image, nullptr);
  const auto pooled = nn::global_avg_pool(nn::leaky_relu(final_map));
  return nn::forward(head_, pooled);
}

EncoderTrace StyleEncoder::forward(const ImageTensor& image) const {
  EncoderTrace trace;
  trace.final_map = run(image, &trace);
  trace.pooled = nn::global_avg_pool(nn::leaky_relu(trace.final_map));
  trace.code = nn::forward(head_, trace.pooled);
  return trace;
}

void StyleEncoder::backward(const EncoderTrace& trace, std::span<const double> grad_code,
                            StyleEncoder& grad) const {
  if (grad_code.size() != config_.code_dim) {
    fail(ErrorKind::Dimension, "style code gradient has length " +
                                   std::to_string(grad_code.size()) + ", expected " +
                                   std::to_string(config_.code_dim));
  }
  const auto grad_pooled = nn::backward(head_, trace.pooled, grad_code, grad.head_);
  Tensor g = nn::leaky_relu_backward(
      trace.final_map,
      nn::global_avg_pool_backward(grad_pooled, trace.final_map.dim(1), trace.final_map.dim(2)));

  for (std::size_t b = blocks_.size(); b-- > 0;) {
    const ResidualBlock& block = blocks_[b];
    ResidualBlock& gblock = grad.blocks_[b];
    const ResidualBlockTrace& t = trace.blocks[b];
    for (double& v : g.values()) v *= kInvSqrt2;

    // Residual branch.
    Tensor g_mid = nn::leaky_relu_backward(t.mid, nn::backward(block.conv2, t.act2, g, gblock.conv2));
    if (block.downsample) g_mid = nn::avg_pool2_backward(g_mid);
    Tensor g_in = nn::leaky_relu_backward(t.input, nn::backward(block.conv1, t.act1, g_mid, gblock.conv1));

    // Skip branch.
    Tensor g_skip = block.downsample ? nn::avg_pool2_backward(g) : g;
    if (block.shortcut) g_skip = nn::backward(*block.shortcut, t.input, g_skip, *gblock.shortcut);
    add_into(g_in, g_skip);
    g = std::move(g_in);
  }
  nn::backward(stem_, trace.image, g, grad.stem_);
}

StyleEncoder StyleEncoder::zeros_like() const {
  StyleEncoder copy = *this;
  copy.visit([](const std::string&, Tensor& t) { t.fill(0.0); });
  return copy;
}

void StyleEncoder::visit(const ParameterVisitor& visitor) {
  visitor("encoder.stem.weight", stem_.weight);
  visitor("encoder.stem.bias", stem_.bias);
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    const std::string prefix = "encoder.blocks." + std::to_string(b) + ".";
    auto& block = blocks_[b];
    visitor(prefix + "conv1.weight", block.conv1.weight);
    visitor(prefix + "conv1.bias", block.conv1.bias);
    visitor(prefix + "conv2.weight", block.conv2.weight);
    visitor(prefix + "conv2.bias", block.conv2.bias);
    if (block.shortcut) visitor(prefix + "shortcut.weight", block.shortcut->weight);
  }
  visitor("encoder.head.weight", head_.weight);
  visitor("encoder.head.bias", head_.bias);
}

void StyleEncoder::visit(const ConstParameterVisitor& visitor) const {
  const_cast<StyleEncoder*>(this)->visit(
      ParameterVisitor([&](const std::string& name, Tensor& t) { visitor(name, t); }));
}

std::size_t StyleEncoder::parameter_count() const {
  std::size_t n = 0;
  visit(ConstParameterVisitor([&](const std::string&, const Tensor& t) { n += t.size(); }));
  return n;
}

StyleCode encode(const StyleEncoder& encoder, const ImageTensor& image) {
  return encoder.encode(image);
}

std::vector<double> style_difference(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    fail(ErrorKind::Dimension, "style codes differ in length: " + std::to_string(a.size()) +
                                   " vs " + std::to_string(b.size()));
  }
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = std::abs(a[i] - b[i]);
  return d;
}

}  // namespace risa
