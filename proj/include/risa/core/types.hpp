#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "risa/core/image.hpp"

namespace risa {

/// Pseudo quality score y in [0, 1].
class QualityLabel {
 public:
  constexpr QualityLabel() = default;
  /// Throws DomainError outside [0, 1] (or NaN).
  explicit QualityLabel(double y);

  constexpr double value() const noexcept { return y_; }
  constexpr auto operator<=>(const QualityLabel&) const = default;

 private:
  double y_ = 0.0;
};

/// K binary targets; t_k = 1 iff y > T_k. Always non-increasing.
using ThermometerVector = std::vector<std::uint8_t>;

/// K sigmoid outputs, each strictly inside (0, 1).
using PredictionVector = std::vector<double>;

enum class Stage { Initial, Stable, Real };

std::string_view to_string(Stage stage);
Stage parse_stage(std::string_view text);

/// One weakly labeled pair {{I_g, I_r}, y} with its provenance.
struct TrainingSample {
  ImageTensor generated;
  ImageTensor reference;
  QualityLabel label;
  Stage stage = Stage::Initial;

  /// Identity of the reference image (its path); negatives must differ from it.
  std::string reference_id;
  std::string pair_id;
  /// Manifest path of the generated image; empty when synthesized here.
  std::string generated_path;
  std::optional<std::size_t> checkpoint_index;
  std::optional<double> epsilon;
};

/// Throws IntegrityError when the stage/label pairing is impossible for the
/// given classifier count: real views carry exactly 1, everything else at
/// most (K-1)/K.
void validate_sample(const TrainingSample& sample, std::size_t num_classifiers);

}  // namespace risa
