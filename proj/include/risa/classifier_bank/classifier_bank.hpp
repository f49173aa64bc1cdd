#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "risa/classifier_bank/thermometer.hpp"
#include "risa/encoder/style_encoder.hpp"

namespace risa {

struct BankConfig {
  /// Number of binary classifiers K.
  std::size_t num_classifiers = 16;
  /// Widths of the shared trunk; empty means the K units read the
  /// difference vector directly.
  std::vector<std::size_t> hidden_dims = {64};

  bool operator==(const BankConfig&) const = default;
};

void validate(const BankConfig& config);

struct BankTrace {
  std::vector<std::vector<double>> inputs;  // input of every dense layer
  std::vector<std::vector<double>> pre_activations;  // hidden layers only
  PredictionVector probabilities;
};

/// K binary classifiers over |z_r - z_g|: a shared leaky-ReLU trunk followed
/// by K independent sigmoid units. Same instance/gradient duality as
/// StyleEncoder.
class ClassifierBank {
 public:
  ClassifierBank() = default;
  ClassifierBank(const BankConfig& config, std::size_t input_dim);

  const BankConfig& config() const noexcept { return config_; }
  std::size_t input_dim() const noexcept { return input_dim_; }
  std::size_t num_classifiers() const noexcept { return config_.num_classifiers; }

  /// Throws DimensionError when diff.size() != input_dim().
  PredictionVector predict(std::span<const double> diff) const;
  BankTrace forward(std::span<const double> diff) const;
  /// Takes d(loss)/d(p) and returns d(loss)/d(diff).
  std::vector<double> backward(const BankTrace& trace, std::span<const double> grad_prob,
                               ClassifierBank& grad) const;

  /// Zeroes the output layer (weights and bias), so every p_k = 0.5.
  void zero_output_layer();

  ClassifierBank zeros_like() const;
  void visit(const ParameterVisitor& visitor);
  void visit(const ConstParameterVisitor& visitor) const;
  std::size_t parameter_count() const;

 private:
  BankConfig config_;
  std::size_t input_dim_ = 0;
  std::vector<nn::Linear> layers_;  // hidden layers then the output layer
};

PredictionVector predict(const ClassifierBank& bank, std::span<const double> diff);

/// The full scorer: encoder plus classifier bank.
struct RisaModel {
  StyleEncoder encoder;
  ClassifierBank bank;

  RisaModel zeros_like() const { return {encoder.zeros_like(), bank.zeros_like()}; }
  void visit(const ParameterVisitor& visitor);
  void visit(const ConstParameterVisitor& visitor) const;
  std::size_t parameter_count() const;
};

/// Builds a zero-parameter model; throws ConfigError on invalid configs.
RisaModel make_model(const EncoderConfig& encoder_config, const BankConfig& bank_config);

/// p(I_r, I_g): predictions on the style difference of the two images.
PredictionVector predict_pair(const RisaModel& model, const ImageTensor& reference,
                              const ImageTensor& generated);

/// Quality of `generated` against `reference`: the mean of the K predictions.
/// Symmetric in its image arguments, strictly inside (0, 1).
double score(const StyleEncoder& encoder, const ClassifierBank& bank, const ImageTensor& reference,
             const ImageTensor& generated);
double score(const RisaModel& model, const ImageTensor& reference, const ImageTensor& generated);

}  // namespace risa
