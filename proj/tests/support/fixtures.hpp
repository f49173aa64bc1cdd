#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "risa/core/error.hpp"
#include "risa/objective/losses.hpp"
#include "risa/trainer/trainer.hpp"

namespace risa::testing {

// Kind of the Error thrown by f, or nullopt when it returns normally.
template <class F>
std::optional<ErrorKind> error_kind(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

inline ImageTensor random_image(std::size_t side, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Tensor t({3, side, side});
  for (double& v : t.values()) v = u(rng);
  return ImageTensor(std::move(t));
}

// Integer LCG image, reproducible bit for bit in any language:
// s <- s * 6364136223846793005 + 1442695040888963407 (mod 2^64),
// u = (s >> 11) * 2^-53, pixel = base + amp * (u - 0.5), channel-major.
inline ImageTensor lcg_image(std::size_t side, std::uint64_t seed, double base, double amp) {
  std::uint64_t s = seed;
  Tensor t({3, side, side});
  for (double& v : t.values()) {
    s = s * 6364136223846793005ULL + 1442695040888963407ULL;
    const double u = static_cast<double>(s >> 11) * 0x1.0p-53;
    v = base + amp * (u - 0.5);
  }
  return ImageTensor(std::move(t));
}

// Tiny scorer: 8x8 images, D = 4, K = 4.
inline EncoderConfig tiny_encoder() {
  return {.depth = 6, .base_channels = 4, .max_channels = 8, .downsamples = 2, .code_dim = 4};
}
inline BankConfig tiny_bank() { return {.num_classifiers = 4, .hidden_dims = {6}}; }

inline RisaModel tiny_model(std::uint64_t seed) {
  return init_model(tiny_encoder(), tiny_bank(), seed);
}

// Holds the images an ObjectiveInputs points at.
struct TinyCase {
  TrainingSample sample;
  ObjectiveInputs inputs;
};

inline TinyCase tiny_case(std::uint64_t seed, double label = 0.375) {
  std::mt19937_64 rng(seed);
  TinyCase c;
  c.sample.generated = random_image(8, rng);
  c.sample.reference = random_image(8, rng);
  c.sample.label = QualityLabel(label);
  c.sample.reference_id = "ref-a";
  c.sample.pair_id = "pair-a";
  c.inputs.views = {random_image(8, rng), random_image(8, rng)};
  c.inputs.negative = {random_image(8, rng), "ref-b"};
  c.inputs.positive_view = PositiveView::Second;
  return c;
}

inline std::vector<double> flatten(const RisaModel& model) {
  std::vector<double> out;
  model.visit(ConstParameterVisitor([&](const std::string&, const Tensor& t) {
    out.insert(out.end(), t.values().begin(), t.values().end());
  }));
  return out;
}

inline double* parameter_at(RisaModel& model, std::size_t index) {
  double* found = nullptr;
  std::size_t offset = 0;
  model.visit(ParameterVisitor([&](const std::string&, Tensor& t) {
    if (found == nullptr && index < offset + t.size()) found = &t[index - offset];
    offset += t.size();
  }));
  return found;
}

inline double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// ||a - b|| / max(||a||, ||b||).
inline double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  const double scale = std::max(norm(a), norm(b));
  return scale == 0.0 ? 0.0 : norm(d) / scale;
}

enum class Term { Sup, Pos, Neg, Supre, Total };

inline const char* term_name(Term t) {
  switch (t) {
    case Term::Sup: return "sup";
    case Term::Pos: return "pos";
    case Term::Neg: return "neg";
    case Term::Supre: return "supre";
    default: return "total";
  }
}

inline double pick(const LossBreakdown& l, Term t) {
  switch (t) {
    case Term::Sup: return l.sup;
    case Term::Pos: return l.pos;
    case Term::Neg: return l.neg;
    case Term::Supre: return l.supre;
    default: return l.total;
  }
}

// Analytic gradient of one term: the objective's gradient with only that
// term switched on, minus the gradient with every optional term off (sup
// always carries weight 1).
inline std::vector<double> analytic_gradient(const ObjectiveInputs& in, const RisaModel& model,
                                             const LossWeights& weights, Term term) {
  auto grad_of = [&](LossWeights w) {
    RisaModel g = model.zeros_like();
    total_loss_and_gradient(in, model, w, g);
    return flatten(g);
  };
  if (term == Term::Total) return grad_of(weights);
  LossWeights off = weights;
  off.lambda_p = off.lambda_n = off.lambda_s = 0.0;
  const auto base = grad_of(off);
  if (term == Term::Sup) return base;
  LossWeights on = off;
  if (term == Term::Pos) on.lambda_p = 1.0;
  if (term == Term::Neg) on.lambda_n = 1.0;
  if (term == Term::Supre) on.lambda_s = 1.0;
  auto g = grad_of(on);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] -= base[i];
  return g;
}

inline std::vector<double> numeric_gradient(const ObjectiveInputs& in, const RisaModel& model,
                                            const LossWeights& weights, Term term, double h) {
  RisaModel probe = model;
  const std::size_t n = probe.parameter_count();
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    double* p = parameter_at(probe, i);
    const double saved = *p;
    *p = saved + h;
    const double up = pick(total_loss(in, probe, weights), term);
    *p = saved - h;
    const double down = pick(total_loss(in, probe, weights), term);
    *p = saved;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

// n distinct tiny samples with distinct references, labels on the k/K grid.
inline std::vector<TrainingSample> tiny_dataset(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<TrainingSample> out;
  for (std::size_t i = 0; i < n; ++i) {
    TrainingSample s;
    s.generated = random_image(8, rng);
    s.reference = random_image(8, rng);
    s.label = QualityLabel(static_cast<double>(i % 4) / 4.0);
    s.reference_id = "ref-" + std::to_string(i);
    s.pair_id = "pair-" + std::to_string(i);
    out.push_back(std::move(s));
  }
  return out;
}

inline TrainOptions tiny_options() {
  TrainOptions o;
  o.encoder_config = tiny_encoder();
  o.bank_config = tiny_bank();
  o.image_side = 8;
  return o;
}

inline TrainConfig tiny_train_config(std::size_t epochs = 2) {
  TrainConfig c;
  c.batch_size = 3;
  c.epochs = epochs;
  c.learning_rate = 1e-3;
  c.seed = 5;
  return c;
}

}  // namespace risa::testing
