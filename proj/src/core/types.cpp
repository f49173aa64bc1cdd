#include "risa/core/types.hpp"

#include <cmath>

#include "risa/core/error.hpp"

namespace risa {

QualityLabel::QualityLabel(double y) : y_(y) {
  if (!(y >= 0.0 && y <= 1.0)) {
    fail(ErrorKind::Domain, "quality label " + std::to_string(y) + " outside [0, 1]");
  }
}

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::Initial: return "initial";
    case Stage::Stable: return "stable";
    case Stage::Real: return "real";
  }
  return "?";
}

Stage parse_stage(std::string_view text) {
  if (text == "initial") return Stage::Initial;
  if (text == "stable") return Stage::Stable;
  if (text == "real") return Stage::Real;
  fail(ErrorKind::Parse, "unknown stage '" + std::string(text) + "'");
}

void validate_sample(const TrainingSample& sample, std::size_t num_classifiers) {
  const double y = sample.label.value();
  const double ceiling =
      static_cast<double>(num_classifiers - 1) / static_cast<double>(num_classifiers);
  if (sample.stage == Stage::Real && y != 1.0) {
    fail(ErrorKind::Integrity, "real-view sample must carry label 1, got " + std::to_string(y));
  }
  if (sample.stage != Stage::Real && y > ceiling) {
    fail(ErrorKind::Integrity, "generated sample label " + std::to_string(y) +
                                   " exceeds (K-1)/K = " + std::to_string(ceiling));
  }
  if (sample.generated.side() != sample.reference.side()) {
    fail(ErrorKind::Shape, "generated and reference images differ in size");
  }
}

}  // namespace risa
