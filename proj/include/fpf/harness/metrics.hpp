#pragma once

#include "fpf/model.hpp"

#include <span>

namespace fpf::harness {

/// (1/T) ∫ ((Σ̂_t − Σ_t)/Σ_t)² dt, discretized as the dt-weighted mean of
/// squared relative errors over the samples. Throws std::invalid_argument on
/// a length mismatch, empty input, dt ≤ 0 or a nonpositive reference entry.
double relative_mse(std::span<const double> estimated, std::span<const double> reference,
                    double dt);

/// Shortest arc between two angles, in [0, π].
double circular_distance(double a, double b);

/// Root-mean-square tracking error of `estimate` against `truth`; shortest
/// arc on the circle.
double tracking_rmse(std::span<const double> estimate, std::span<const double> truth,
                     Geometry geometry);

}  // namespace fpf::harness
