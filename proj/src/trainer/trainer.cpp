#include "risa/trainer/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "risa/core/error.hpp"

namespace risa {

namespace {

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::vector<Tensor*> parameter_list(RisaModel& model) {
  std::vector<Tensor*> out;
  model.visit(ParameterVisitor([&](const std::string&, Tensor& t) { out.push_back(&t); }));
  return out;
}

std::vector<const Tensor*> parameter_list(const RisaModel& model) {
  std::vector<const Tensor*> out;
  model.visit(ConstParameterVisitor([&](const std::string&, const Tensor& t) { out.push_back(&t); }));
  return out;
}

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t purpose, std::uint64_t a,
                       std::uint64_t b = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(purpose), static_cast<std::uint32_t>(a),
                    static_cast<std::uint32_t>(a >> 32), static_cast<std::uint32_t>(b)};
  return std::mt19937_64(seq);
}

enum Purpose : std::uint64_t { kShuffle = 1, kPairing = 2, kViews = 3 };

bool finite(const LossBreakdown& l) {
  return std::isfinite(l.sup) && std::isfinite(l.pos) && std::isfinite(l.neg) &&
         std::isfinite(l.supre) && std::isfinite(l.total);
}

std::string describe(const LossBreakdown& l) {
  std::ostringstream out;
  out << "sup=" << l.sup << " pos=" << l.pos << " neg=" << l.neg << " supre=" << l.supre
      << " total=" << l.total;
  return out.str();
}

}  // namespace

void validate(const TrainConfig& c) {
  if (c.batch_size < 2) {
    fail(ErrorKind::Config, "batch_size must be >= 2 so each batch offers a negative reference");
  }
  if (c.epochs < 1) fail(ErrorKind::Config, "epochs must be >= 1");
  if (!(c.learning_rate >= 0.0)) fail(ErrorKind::Config, "learning_rate must be >= 0");
  if (!(c.weight_decay >= 0.0)) fail(ErrorKind::Config, "weight_decay must be >= 0");
  if (!(c.adam_beta1 >= 0.0 && c.adam_beta1 < 1.0)) fail(ErrorKind::Config, "adam_beta1 must lie in [0, 1)");
  if (!(c.adam_beta2 >= 0.0 && c.adam_beta2 < 1.0)) fail(ErrorKind::Config, "adam_beta2 must lie in [0, 1)");
  if (!(c.adam_epsilon > 0.0)) fail(ErrorKind::Config, "adam_epsilon must be > 0");
}

RisaModel init_model(const EncoderConfig& encoder_config, const BankConfig& bank_config,
                     std::uint64_t seed) {
  RisaModel model = make_model(encoder_config, bank_config);
  std::mt19937_64 rng(seed);
  model.visit(ParameterVisitor([&](const std::string& name, Tensor& t) {
    if (ends_with(name, ".bias")) {
      t.fill(0.0);
      return;
    }
    // fan_in: every axis but the output one.
    const std::size_t fan_in = t.size() / t.dim(0);
    std::normal_distribution<double> he(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
    for (double& v : t.values()) v = he(rng);
  }));
  return model;
}

AdamW::AdamW(const TrainConfig& config, const RisaModel& model) : config_(config) {
  for (const Tensor* t : parameter_list(model)) {
    state_.first_moment.push_back(t->zeros_like());
    state_.second_moment.push_back(t->zeros_like());
  }
}

AdamW::AdamW(const TrainConfig& config, OptimizerState state)
    : config_(config), state_(std::move(state)) {}

void AdamW::step(RisaModel& model, const RisaModel& grad) {
  auto params = parameter_list(model);
  const auto grads = parameter_list(grad);
  if (params.size() != state_.first_moment.size() || grads.size() != params.size()) {
    fail(ErrorKind::Integrity, "optimizer state does not match the model");
  }
  ++state_.step;
  const double lr = config_.learning_rate;
  const double b1 = config_.adam_beta1;
  const double b2 = config_.adam_beta2;
  const auto t = static_cast<double>(state_.step);
  const double bias1 = 1.0 - std::pow(b1, t);
  const double bias2 = 1.0 - std::pow(b2, t);
  const double decay = 1.0 - lr * config_.weight_decay;
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i];
    const Tensor& g = *grads[i];
    Tensor& m = state_.first_moment[i];
    Tensor& v = state_.second_moment[i];
    for (std::size_t k = 0; k < p.size(); ++k) {
      m[k] = b1 * m[k] + (1.0 - b1) * g[k];
      v[k] = b2 * v[k] + (1.0 - b2) * g[k] * g[k];
      const double m_hat = m[k] / bias1;
      const double v_hat = v[k] / bias2;
      p[k] = p[k] * decay - lr * m_hat / (std::sqrt(v_hat) + config_.adam_epsilon);
    }
  }
}

void write_log_header(std::ostream& out) { out << "step,sup,pos,neg,supre,total\n"; }

void write_log_row(std::ostream& out, const LogRow& row) {
  const auto old_precision = out.precision(17);
  out << row.step << ',' << row.loss.sup << ',' << row.loss.pos << ',' << row.loss.neg << ','
      << row.loss.supre << ',' << row.loss.total << '\n';
  out.precision(old_precision);
}

std::vector<double> epoch_mean_totals(const std::vector<LogRow>& log) {
  std::vector<double> means;
  std::vector<std::size_t> counts;
  std::size_t current = 0;
  for (const auto& row : log) {
    if (means.empty() || row.epoch != current) {
      means.push_back(0.0);
      counts.push_back(0);
      current = row.epoch;
    }
    means.back() += row.loss.total;
    ++counts.back();
  }
  for (std::size_t i = 0; i < means.size(); ++i) means[i] /= static_cast<double>(counts[i]);
  return means;
}

TrainResult train(const std::vector<TrainingSample>& dataset, const TrainConfig& config,
                  const LossWeights& weights, const TrainOptions& options) {
  validate(config);
  validate(weights);
  validate(options.augmentation);
  if (dataset.empty()) fail(ErrorKind::InsufficientData, "training set is empty");
  const std::size_t k = options.bank_config.num_classifiers;
  for (const auto& s : dataset) validate_sample(s, k);

  TrainResult result;
  Checkpoint& ckpt = result.checkpoint;
  std::optional<AdamW> optimizer;
  if (options.resume) {
    ckpt = *options.resume;
    if (ckpt.encoder_config != options.encoder_config || ckpt.bank_config != options.bank_config) {
      fail(ErrorKind::Config, "resume checkpoint architecture differs from the configured one");
    }
    if (ckpt.optimizer) {
      optimizer.emplace(config, *ckpt.optimizer);
    } else {
      optimizer.emplace(config, ckpt.model);
    }
  } else {
    ckpt.model = init_model(options.encoder_config, options.bank_config, config.seed);
    ckpt.epoch = 0;
    optimizer.emplace(config, ckpt.model);
  }
  ckpt.encoder_config = options.encoder_config;
  ckpt.bank_config = options.bank_config;
  ckpt.train_config = config;
  ckpt.loss_weights = weights;
  ckpt.augmentation = options.augmentation;
  ckpt.image_side = options.image_side;
  for (const auto& s : dataset) ckpt.model.encoder.check_input(s.generated.side());

  std::size_t step = optimizer->state().step;
  const std::size_t n = dataset.size();
  std::vector<std::size_t> order(n);

  for (std::size_t epoch = ckpt.epoch + 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto shuffle_rng = stream(config.seed, kShuffle, epoch);
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    for (std::size_t begin = 0; begin < n; begin += config.batch_size) {
      const std::size_t end = std::min(n, begin + config.batch_size);
      const std::span<const std::size_t> batch(order.data() + begin, end - begin);
      ++step;
      RisaModel grad = ckpt.model.zeros_like();
      LossBreakdown mean;
      const double scale = 1.0 / static_cast<double>(batch.size());

      for (std::size_t slot = 0; slot < batch.size(); ++slot) {
        const TrainingSample& sample = dataset[batch[slot]];
        auto rng = stream(config.seed, kPairing, step, slot);

        // Negative: another reference from this batch, else from the whole set.
        std::vector<std::size_t> candidates;
        for (std::size_t other : batch) {
          if (dataset[other].reference_id != sample.reference_id) candidates.push_back(other);
        }
        if (candidates.empty()) {
          for (std::size_t other = 0; other < n; ++other) {
            if (dataset[other].reference_id != sample.reference_id) candidates.push_back(other);
          }
        }
        if (candidates.empty()) {
          fail(ErrorKind::Sampling, "every sample shares one reference; no negative available");
        }
        std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
        const TrainingSample& negative = dataset[candidates[pick(rng)]];
        const auto positive = std::bernoulli_distribution(0.5)(rng) ? PositiveView::First
                                                                    : PositiveView::Second;

        AugmentationSpec view_spec = options.augmentation;
        view_spec.seed = options.augmentation.seed ^ (config.seed * 0x9e3779b97f4a7c15ULL);
        const std::uint64_t draw = (static_cast<std::uint64_t>(step) << 16) | (slot << 1);
        ObjectiveInputs inputs;
        inputs.sample = &sample;
        inputs.views = {augment_style_preserving(sample.reference, view_spec, draw),
                        augment_style_preserving(sample.reference, view_spec, draw | 1)};
        inputs.negative = {negative.reference, negative.reference_id};
        inputs.positive_view = positive;

        LossBreakdown loss;
        try {
          loss = total_loss_and_gradient(inputs, ckpt.model, weights, grad, scale);
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::Numeric) throw;
          fail(ErrorKind::Numeric, "non-finite loss at step " + std::to_string(step) + " (sample " +
                                       std::to_string(batch[slot]) + "): " + e.what());
        }
        mean.sup += scale * loss.sup;
        mean.pos += scale * loss.pos;
        mean.neg += scale * loss.neg;
        mean.supre += scale * loss.supre;
        mean.total += scale * loss.total;
      }

      if (!finite(mean)) {
        std::ostringstream ids;
        for (std::size_t i : batch) ids << ' ' << i;
        fail(ErrorKind::Numeric, "non-finite loss at step " + std::to_string(step) + " (batch" +
                                     ids.str() + "): " + describe(mean));
      }
      optimizer->step(ckpt.model, grad);
      LogRow row{step, epoch, mean};
      result.log.push_back(row);
      if (options.on_step) options.on_step(row);
    }

    ckpt.epoch = epoch;
    ckpt.optimizer = optimizer->state();
    const bool periodic = config.checkpoint_every != 0 && epoch % config.checkpoint_every == 0;
    if (options.on_checkpoint && (periodic || epoch == config.epochs)) options.on_checkpoint(ckpt);
  }
  ckpt.optimizer = optimizer->state();
  return result;
}

}  // namespace risa
