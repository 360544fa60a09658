#include "fpf/harness/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fpf::harness {

double relative_mse(std::span<const double> estimated, std::span<const double> reference,
                    double dt) {
  if (estimated.size() != reference.size()) {
    throw std::invalid_argument("relative_mse: series lengths differ");
  }
  if (estimated.empty()) {
    throw std::invalid_argument("relative_mse: empty series");
  }
  if (!(dt > 0.0)) {
    throw std::invalid_argument("relative_mse: dt must be positive");
  }
  double integral = 0.0;
  for (std::size_t k = 0; k < estimated.size(); ++k) {
    if (!(reference[k] > 0.0)) {
      throw std::invalid_argument("relative_mse: reference must be strictly positive");
    }
    const double rel = (estimated[k] - reference[k]) / reference[k];
    integral += rel * rel * dt;
  }
  const double horizon = dt * static_cast<double>(estimated.size());
  return integral / horizon;
}

double circular_distance(double a, double b) {
  const double d = std::abs(wrap_angle(a - b));
  return std::min(d, two_pi - d);
}

double tracking_rmse(std::span<const double> estimate, std::span<const double> truth,
                     Geometry geometry) {
  if (estimate.size() != truth.size() || estimate.empty()) {
    throw std::invalid_argument("tracking_rmse: series lengths differ or are empty");
  }
  double ss = 0.0;
  for (std::size_t k = 0; k < estimate.size(); ++k) {
    const double e = geometry == Geometry::circle ? circular_distance(estimate[k], truth[k])
                                                  : estimate[k] - truth[k];
    ss += e * e;
  }
  return std::sqrt(ss / static_cast<double>(estimate.size()));
}

}  // namespace fpf::harness
