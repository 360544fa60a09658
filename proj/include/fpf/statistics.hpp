#pragma once

#include <span>

namespace fpf {

/// Arithmetic mean, summed left to right.
double sample_mean(std::span<const double> values);

/// Two-pass unbiased variance (N−1 denominator). Zero for fewer than two values.
double sample_variance(std::span<const double> values);

}  // namespace fpf
