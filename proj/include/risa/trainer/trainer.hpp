#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "risa/classifier_bank/classifier_bank.hpp"
#include "risa/dataprep/augment.hpp"
#include "risa/objective/losses.hpp"

namespace risa {

struct TrainConfig {
  std::size_t batch_size = 4;
  std::size_t epochs = 100;
  double learning_rate = 1e-4;
  double weight_decay = 1e-4;
  double adam_beta1 = 0.0;
  double adam_beta2 = 0.99;
  double adam_epsilon = 1e-8;
  std::uint64_t seed = 0;
  /// Save every N epochs through TrainOptions::on_checkpoint; 0 = only at the end.
  std::size_t checkpoint_every = 0;

  bool operator==(const TrainConfig&) const = default;
};

/// Throws ConfigError: batch_size >= 2 (negatives come from the batch),
/// epochs >= 1, rates >= 0, betas in [0, 1).
void validate(const TrainConfig& config);

/// He-normal weights (std = sqrt(2 / fan_in)), zero biases, deterministic in
/// seed.
RisaModel init_model(const EncoderConfig& encoder_config, const BankConfig& bank_config,
                     std::uint64_t seed);

struct OptimizerState {
  std::uint64_t step = 0;
  std::vector<Tensor> first_moment;   // model.visit order
  std::vector<Tensor> second_moment;  // model.visit order
};

/// Adam with weight decay applied directly to the parameters:
///   p <- p * (1 - lr * wd)
///   p <- p - lr * m_hat / (sqrt(v_hat) + eps)
class AdamW {
 public:
  AdamW(const TrainConfig& config, const RisaModel& model);
  AdamW(const TrainConfig& config, OptimizerState state);

  void step(RisaModel& model, const RisaModel& grad);
  const OptimizerState& state() const noexcept { return state_; }

 private:
  TrainConfig config_;
  OptimizerState state_;
};

/// Everything needed to score with, or resume, a trained model.
struct Checkpoint {
  static constexpr std::uint32_t kFormatVersion = 1;

  RisaModel model;
  EncoderConfig encoder_config;
  BankConfig bank_config;
  TrainConfig train_config;
  LossWeights loss_weights;
  AugmentationSpec augmentation;
  std::size_t image_side = 64;
  std::size_t epoch = 0;
  std::optional<OptimizerState> optimizer;
};

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
void write_checkpoint(const Checkpoint& checkpoint, std::ostream& out);
/// Throws IncompatibleVersion for a foreign format version and Decode for a
/// truncated, corrupted or inconsistent file. A file without optimizer state
/// loads with `optimizer` empty.
Checkpoint load_checkpoint(const std::filesystem::path& path);
Checkpoint read_checkpoint(std::istream& in);

struct LogRow {
  std::size_t step = 0;
  std::size_t epoch = 0;
  LossBreakdown loss;  // batch mean
};

void write_log_header(std::ostream& out);
void write_log_row(std::ostream& out, const LogRow& row);

/// Mean total loss of each epoch, in epoch order.
std::vector<double> epoch_mean_totals(const std::vector<LogRow>& log);

struct TrainOptions {
  EncoderConfig encoder_config;
  BankConfig bank_config;
  AugmentationSpec augmentation;
  std::size_t image_side = 64;
  /// Continue from this checkpoint's epoch counter, parameters and optimizer.
  std::optional<Checkpoint> resume;
  std::function<void(const LogRow&)> on_step;
  std::function<void(const Checkpoint&)> on_checkpoint;
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<LogRow> log;
};

/// Runs epochs x ceil(N / batch) AdamW steps on the full objective (mean over
/// each mini-batch). Every sample draws one negative reference from the other
/// references of its batch (falling back to the whole set), two fresh views
/// of its reference and a positive view, all from seeded streams, so a run is
/// a pure function of (dataset, configs). Throws NumericError with the step,
/// batch indices and loss components when a loss turns non-finite.
TrainResult train(const std::vector<TrainingSample>& dataset, const TrainConfig& config,
                  const LossWeights& weights, const TrainOptions& options);

}  // namespace risa
