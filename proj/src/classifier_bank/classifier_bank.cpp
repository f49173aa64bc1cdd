#include "risa/classifier_bank/classifier_bank.hpp"

#include "risa/core/error.hpp"

namespace risa {

void validate(const BankConfig& config) {
  if (config.num_classifiers < 2) {
    fail(ErrorKind::Config, "bank needs K >= 2, got " + std::to_string(config.num_classifiers));
  }
  for (std::size_t width : config.hidden_dims) {
    if (width == 0) fail(ErrorKind::Config, "bank hidden widths must be positive");
  }
}

ClassifierBank::ClassifierBank(const BankConfig& config, std::size_t input_dim)
    : config_(config), input_dim_(input_dim) {
  validate(config_);
  if (input_dim_ == 0) fail(ErrorKind::Config, "bank input dimension must be positive");
  std::size_t width = input_dim_;
  for (std::size_t hidden : config_.hidden_dims) {
    layers_.emplace_back(width, hidden);
    width = hidden;
  }
  layers_.emplace_back(width, config_.num_classifiers);
}

BankTrace ClassifierBank::forward(std::span<const double> diff) const {
  if (diff.size() != input_dim_) {
    fail(ErrorKind::Dimension, "classifier bank expects a difference vector of length " +
                                   std::to_string(input_dim_) + ", got " +
                                   std::to_string(diff.size()));
  }
  BankTrace trace;
  std::vector<double> h(diff.begin(), diff.end());
  for (std::size_t l = 0; l + 1 < layers_.size(); ++l) {
    trace.inputs.push_back(h);
    auto pre = nn::forward(layers_[l], h);
    h = nn::leaky_relu(pre);
    trace.pre_activations.push_back(std::move(pre));
  }
  trace.inputs.push_back(h);
  const auto logits = nn::forward(layers_.back(), h);
  trace.probabilities.resize(logits.size());
  for (std::size_t k = 0; k < logits.size(); ++k) trace.probabilities[k] = nn::sigmoid(logits[k]);
  return trace;
}

PredictionVector ClassifierBank::predict(std::span<const double> diff) const {
  return forward(diff).probabilities;
}

std::vector<double> ClassifierBank::backward(const BankTrace& trace,
                                             std::span<const double> grad_prob,
                                             ClassifierBank& grad) const {
  if (grad_prob.size() != config_.num_classifiers) {
    fail(ErrorKind::Dimension, "prediction gradient must have length K");
  }
  std::vector<double> g(grad_prob.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double p = trace.probabilities[k];
    g[k] = grad_prob[k] * p * (1.0 - p);
  }
  const std::size_t last = layers_.size() - 1;
  g = nn::backward(layers_[last], trace.inputs[last], g, grad.layers_[last]);
  for (std::size_t l = last; l-- > 0;) {
    g = nn::leaky_relu_backward(trace.pre_activations[l], g);
    g = nn::backward(layers_[l], trace.inputs[l], g, grad.layers_[l]);
  }
  return g;
}

void ClassifierBank::zero_output_layer() {
  layers_.back().weight.fill(0.0);
  layers_.back().bias.fill(0.0);
}

ClassifierBank ClassifierBank::zeros_like() const {
  ClassifierBank copy = *this;
  copy.visit([](const std::string&, Tensor& t) { t.fill(0.0); });
  return copy;
}

void ClassifierBank::visit(const ParameterVisitor& visitor) {
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const std::string prefix = l + 1 == layers_.size()
                                   ? std::string("bank.output.")
                                   : "bank.hidden." + std::to_string(l) + ".";
    visitor(prefix + "weight", layers_[l].weight);
    visitor(prefix + "bias", layers_[l].bias);
  }
}

void ClassifierBank::visit(const ConstParameterVisitor& visitor) const {
  const_cast<ClassifierBank*>(this)->visit(
      ParameterVisitor([&](const std::string& name, Tensor& t) { visitor(name, t); }));
}

std::size_t ClassifierBank::parameter_count() const {
  std::size_t n = 0;
  visit(ConstParameterVisitor([&](const std::string&, const Tensor& t) { n += t.size(); }));
  return n;
}

PredictionVector predict(const ClassifierBank& bank, std::span<const double> diff) {
  return bank.predict(diff);
}

void RisaModel::visit(const ParameterVisitor& visitor) {
  encoder.visit(visitor);
  bank.visit(visitor);
}

void RisaModel::visit(const ConstParameterVisitor& visitor) const {
  encoder.visit(visitor);
  bank.visit(visitor);
}

std::size_t RisaModel::parameter_count() const {
  return encoder.parameter_count() + bank.parameter_count();
}

RisaModel make_model(const EncoderConfig& encoder_config, const BankConfig& bank_config) {
  StyleEncoder encoder(encoder_config);
  ClassifierBank bank(bank_config, encoder_config.code_dim);
  return {std::move(encoder), std::move(bank)};
}

PredictionVector predict_pair(const RisaModel& model, const ImageTensor& reference,
                              const ImageTensor& generated) {
  const auto z_r = model.encoder.encode(reference);
  const auto z_g = model.encoder.encode(generated);
  return model.bank.predict(style_difference(z_r, z_g));
}

double score(const StyleEncoder& encoder, const ClassifierBank& bank, const ImageTensor& reference,
             const ImageTensor& generated) {
  const auto z_r = encoder.encode(reference);
  const auto z_g = encoder.encode(generated);
  return decode_mean(bank.predict(style_difference(z_r, z_g)));
}

double score(const RisaModel& model, const ImageTensor& reference, const ImageTensor& generated) {
  return score(model.encoder, model.bank, reference, generated);
}

}  // namespace risa
