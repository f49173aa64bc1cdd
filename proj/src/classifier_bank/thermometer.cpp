#include "risa/classifier_bank/thermometer.hpp"

#include <numeric>

#include "risa/core/error.hpp"

namespace risa {

namespace {

void check_count(std::size_t num_classifiers) {
  if (num_classifiers < 2) {
    fail(ErrorKind::Config, "need at least 2 classifiers, got " + std::to_string(num_classifiers));
  }
}

}  // namespace

ThresholdSchedule thresholds(std::size_t num_classifiers) {
  check_count(num_classifiers);
  ThresholdSchedule schedule;
  schedule.thresholds.reserve(num_classifiers);
  const auto k_total = static_cast<double>(num_classifiers);
  for (std::size_t k = 1; k <= num_classifiers; ++k) {
    schedule.thresholds.push_back(static_cast<double>(k - 1) / k_total);
  }
  return schedule;
}

ThermometerVector to_thermometer(double y, std::size_t num_classifiers) {
  return to_thermometer(QualityLabel(y), num_classifiers);
}

ThermometerVector to_thermometer(QualityLabel y, std::size_t num_classifiers) {
  const auto schedule = thresholds(num_classifiers);
  ThermometerVector bits(num_classifiers, 0);
  for (std::size_t k = 0; k < num_classifiers; ++k) {
    bits[k] = y.value() > schedule.thresholds[k] ? 1 : 0;
  }
  return bits;
}

double decode_mean(std::span<const double> values) {
  if (values.empty()) fail(ErrorKind::Dimension, "cannot decode an empty vector");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double decode_mean(const ThermometerVector& bits) {
  const std::vector<double> values(bits.begin(), bits.end());
  return decode_mean(values);
}

}  // namespace risa
