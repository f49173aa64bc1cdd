#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "risa/classifier_bank/classifier_bank.hpp"
#include "risa/core/types.hpp"

namespace risa {

/// Predictions are clamped to [kProbabilityFloor, 1 - kProbabilityFloor]
/// inside every log.
inline constexpr double kProbabilityFloor = 1e-7;

struct LossWeights {
  double lambda_p = 1.0;
  double lambda_n = 1.0;
  double lambda_s = 1.0;
  double gamma = 0.5;

  bool operator==(const LossWeights&) const = default;
};

/// Throws ConfigError for negative weights or gamma outside [0, 1].
void validate(const LossWeights& weights);

struct LossBreakdown {
  double sup = 0.0;
  double pos = 0.0;
  double neg = 0.0;
  double supre = 0.0;
  double total = 0.0;
};

/// -sum_k [t_k log p_k + (1 - t_k) log(1 - p_k)].
double weakly_supervised_loss(std::span<const double> p, const ThermometerVector& t);
/// d/dp of the above; zero for entries that hit the clamp.
std::vector<double> weakly_supervised_grad(std::span<const double> p, const ThermometerVector& t);

/// ||p1 - p2||^2.
double contrastive_positive(std::span<const double> p1, std::span<const double> p2);

/// max(0, s_neg - gamma * s_pos). Scores and gamma must lie in [0, 1].
double contrastive_negative(double s_neg, double s_pos, double gamma);

/// -sum_k log p_k: cross-entropy against the all-ones target.
double supremum_loss(std::span<const double> p);
std::vector<double> supremum_grad(std::span<const double> p);

enum class PositiveView { First, Second };

/// A reference image from a different pair, used as the contrastive negative.
struct NegativeReference {
  ImageTensor image;
  std::string reference_id;
};

/// Everything one evaluation of the full objective needs besides the model.
struct ObjectiveInputs {
  const TrainingSample* sample = nullptr;
  std::pair<ImageTensor, ImageTensor> views;  // two augmentations of the reference
  NegativeReference negative;
  PositiveView positive_view = PositiveView::First;
};

/// Full objective on one sample:
///   sup   on p(I_r, I_g) against t(y)
///   pos   on p(v1, I_g) vs p(v2, I_g)
///   neg   on s(I_neg, I_g) vs s(v_pos, I_g)
///   supre on p(v1, v2) against all ones
/// Throws SamplingError when the negative shares the sample's reference.
LossBreakdown total_loss(const ObjectiveInputs& inputs, const RisaModel& model,
                         const LossWeights& weights);

/// Same value as total_loss; also adds scale * d(total)/d(params) into `grad`.
LossBreakdown total_loss_and_gradient(const ObjectiveInputs& inputs, const RisaModel& model,
                                      const LossWeights& weights, RisaModel& grad,
                                      double scale = 1.0);

}  // namespace risa
