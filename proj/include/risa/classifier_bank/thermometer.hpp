#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "risa/core/types.hpp"

namespace risa {

/// T_k = (k-1)/K for k = 1..K; strictly increasing, T_1 = 0.
struct ThresholdSchedule {
  std::vector<double> thresholds;
};

/// Throws ConfigError for K < 2.
ThresholdSchedule thresholds(std::size_t num_classifiers);

/// t_k = 1 iff y > T_k (strict). Throws DomainError for y outside [0, 1] and
/// ConfigError for K < 2.
ThermometerVector to_thermometer(double y, std::size_t num_classifiers);
ThermometerVector to_thermometer(QualityLabel y, std::size_t num_classifiers);

/// Arithmetic mean of a thermometer or prediction vector. Throws
/// DimensionError on an empty input.
double decode_mean(std::span<const double> values);
double decode_mean(const ThermometerVector& bits);

}  // namespace risa
