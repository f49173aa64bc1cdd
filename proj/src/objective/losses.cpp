#include "risa/objective/losses.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "risa/core/error.hpp"

namespace risa {

namespace {

void check_probabilities(std::span<const double> p) {
  for (double v : p) {
    if (std::isnan(v)) fail(ErrorKind::Numeric, "prediction is NaN");
    if (!(v >= 0.0 && v <= 1.0)) {
      fail(ErrorKind::Domain, "prediction " + std::to_string(v) + " outside [0, 1]");
    }
  }
}

void check_score(double s, const char* what) {
  if (std::isnan(s)) fail(ErrorKind::Numeric, std::string(what) + " is NaN");
  if (!(s >= 0.0 && s <= 1.0)) {
    fail(ErrorKind::Domain, std::string(what) + " " + std::to_string(s) + " outside [0, 1]");
  }
}

bool clamped(double p) { return p < kProbabilityFloor || p > 1.0 - kProbabilityFloor; }

double clamp_probability(double p) {
  return std::clamp(p, kProbabilityFloor, 1.0 - kProbabilityFloor);
}

}  // namespace

void validate(const LossWeights& w) {
  if (!(w.lambda_p >= 0.0 && w.lambda_n >= 0.0 && w.lambda_s >= 0.0)) {
    fail(ErrorKind::Config, "loss weights must be non-negative");
  }
  if (!(w.gamma >= 0.0 && w.gamma <= 1.0)) fail(ErrorKind::Config, "gamma must lie in [0, 1]");
}

double weakly_supervised_loss(std::span<const double> p, const ThermometerVector& t) {
  if (p.size() != t.size()) {
    fail(ErrorKind::Dimension, "prediction and target lengths differ");
  }
  check_probabilities(p);
  double loss = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double q = clamp_probability(p[k]);
    loss -= t[k] ? std::log(q) : std::log(1.0 - q);
  }
  return loss;
}

std::vector<double> weakly_supervised_grad(std::span<const double> p, const ThermometerVector& t) {
  if (p.size() != t.size()) {
    fail(ErrorKind::Dimension, "prediction and target lengths differ");
  }
  std::vector<double> g(p.size(), 0.0);
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (clamped(p[k])) continue;
    g[k] = t[k] ? -1.0 / p[k] : 1.0 / (1.0 - p[k]);
  }
  return g;
}

double contrastive_positive(std::span<const double> p1, std::span<const double> p2) {
  if (p1.size() != p2.size()) {
    fail(ErrorKind::Dimension, "positive pair predictions differ in length");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < p1.size(); ++k) {
    const double d = p1[k] - p2[k];
    sum += d * d;
  }
  return sum;
}

double contrastive_negative(double s_neg, double s_pos, double gamma) {
  check_score(s_neg, "negative score");
  check_score(s_pos, "positive score");
  if (!(gamma >= 0.0 && gamma <= 1.0)) fail(ErrorKind::Domain, "gamma must lie in [0, 1]");
  return std::max(0.0, s_neg - gamma * s_pos);
}

double supremum_loss(std::span<const double> p) {
  check_probabilities(p);
  double loss = 0.0;
  for (double v : p) loss -= std::log(clamp_probability(v));
  return loss;
}

std::vector<double> supremum_grad(std::span<const double> p) {
  std::vector<double> g(p.size(), 0.0);
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (!clamped(p[k])) g[k] = -1.0 / p[k];
  }
  return g;
}

namespace {

enum Image : std::size_t { kGenerated, kReference, kView1, kView2, kNegative, kImageCount };

// Bank evaluation on the style difference of two encoded images.
struct PairEval {
  Image a;
  Image b;
  BankTrace bank;
  std::vector<double> diff;
  std::vector<double> grad_prob;  // d(total)/d(p), filled during backward
};

void check_negative(const ObjectiveInputs& in) {
  if (in.sample == nullptr) fail(ErrorKind::Config, "objective needs a training sample");
  const auto& sample = *in.sample;
  if (!sample.reference_id.empty() && sample.reference_id == in.negative.reference_id) {
    fail(ErrorKind::Sampling,
         "negative reference shares the sample's reference '" + sample.reference_id + "'");
  }
  if (in.negative.image == sample.reference) {
    fail(ErrorKind::Sampling, "negative reference is identical to the true reference");
  }
}

LossBreakdown evaluate(const ObjectiveInputs& in, const RisaModel& model,
                       const LossWeights& weights, RisaModel* grad, double scale) {
  validate(weights);
  check_negative(in);
  const TrainingSample& sample = *in.sample;
  const StyleEncoder& encoder = model.encoder;

  const std::array<const ImageTensor*, kImageCount> images = {
      &sample.generated, &sample.reference, &in.views.first, &in.views.second, &in.negative.image};
  std::array<EncoderTrace, kImageCount> traces;
  for (std::size_t i = 0; i < kImageCount; ++i) traces[i] = encoder.forward(*images[i]);

  auto eval_pair = [&](Image a, Image b) {
    PairEval e{a, b, {}, style_difference(traces[a].code, traces[b].code), {}};
    e.bank = model.bank.forward(e.diff);
    e.grad_prob.assign(e.bank.probabilities.size(), 0.0);
    return e;
  };
  // p(I_r, I_g), p(v1, I_g), p(v2, I_g), p(I_neg, I_g), p(v1, v2)
  PairEval sup = eval_pair(kReference, kGenerated);
  PairEval pos1 = eval_pair(kView1, kGenerated);
  PairEval pos2 = eval_pair(kView2, kGenerated);
  PairEval neg = eval_pair(kNegative, kGenerated);
  PairEval supre = eval_pair(kView1, kView2);
  PairEval& positive = in.positive_view == PositiveView::First ? pos1 : pos2;

  const std::size_t num_classifiers = model.bank.num_classifiers();
  const ThermometerVector target = to_thermometer(sample.label, num_classifiers);
  const double s_neg = decode_mean(neg.bank.probabilities);
  const double s_pos = decode_mean(positive.bank.probabilities);

  LossBreakdown out;
  out.sup = weakly_supervised_loss(sup.bank.probabilities, target);
  out.pos = contrastive_positive(pos1.bank.probabilities, pos2.bank.probabilities);
  out.neg = contrastive_negative(s_neg, s_pos, weights.gamma);
  out.supre = supremum_loss(supre.bank.probabilities);
  out.total = out.sup + weights.lambda_p * out.pos + weights.lambda_n * out.neg +
              weights.lambda_s * out.supre;
  if (grad == nullptr) return out;

  // d(total)/d(p) for every pair evaluation.
  const auto g_sup = weakly_supervised_grad(sup.bank.probabilities, target);
  for (std::size_t k = 0; k < num_classifiers; ++k) sup.grad_prob[k] = scale * g_sup[k];
  if (weights.lambda_p != 0.0) {
    for (std::size_t k = 0; k < num_classifiers; ++k) {
      const double d = 2.0 * (pos1.bank.probabilities[k] - pos2.bank.probabilities[k]);
      pos1.grad_prob[k] += scale * weights.lambda_p * d;
      pos2.grad_prob[k] -= scale * weights.lambda_p * d;
    }
  }
  // Subgradient 0 at the hinge.
  if (weights.lambda_n != 0.0 && s_neg - weights.gamma * s_pos > 0.0) {
    const double unit = scale * weights.lambda_n / static_cast<double>(num_classifiers);
    for (std::size_t k = 0; k < num_classifiers; ++k) {
      neg.grad_prob[k] += unit;
      positive.grad_prob[k] -= weights.gamma * unit;
    }
  }
  if (weights.lambda_s != 0.0) {
    const auto g = supremum_grad(supre.bank.probabilities);
    for (std::size_t k = 0; k < num_classifiers; ++k) {
      supre.grad_prob[k] += scale * weights.lambda_s * g[k];
    }
  }

  // Back through the bank and |z_a - z_b| into per-image code gradients.
  std::array<std::vector<double>, kImageCount> grad_codes;
  std::array<bool, kImageCount> touched{};
  for (auto& g : grad_codes) g.assign(encoder.config().code_dim, 0.0);
  for (PairEval* e : {&sup, &pos1, &pos2, &neg, &supre}) {
    const bool active = std::any_of(e->grad_prob.begin(), e->grad_prob.end(),
                                    [](double v) { return v != 0.0; });
    if (!active) continue;
    const auto g_diff = model.bank.backward(e->bank, e->grad_prob, grad->bank);
    const auto& za = traces[e->a].code;
    const auto& zb = traces[e->b].code;
    for (std::size_t i = 0; i < g_diff.size(); ++i) {
      const double delta = za[i] - zb[i];
      const double sign = delta > 0.0 ? 1.0 : (delta < 0.0 ? -1.0 : 0.0);
      grad_codes[e->a][i] += sign * g_diff[i];
      grad_codes[e->b][i] -= sign * g_diff[i];
    }
    touched[e->a] = touched[e->b] = true;
  }
  for (std::size_t i = 0; i < kImageCount; ++i) {
    if (touched[i]) encoder.backward(traces[i], grad_codes[i], grad->encoder);
  }
  return out;
}

}  // namespace

LossBreakdown total_loss(const ObjectiveInputs& inputs, const RisaModel& model,
                         const LossWeights& weights) {
  return evaluate(inputs, model, weights, nullptr, 1.0);
}

LossBreakdown total_loss_and_gradient(const ObjectiveInputs& inputs, const RisaModel& model,
                                      const LossWeights& weights, RisaModel& grad, double scale) {
  return evaluate(inputs, model, weights, &grad, scale);
}

}  // namespace risa
