#pragma once

#include <span>
#include <vector>

namespace fpf {

/// How the sum-of-Gaussians density is evaluated at the particles.
///
/// `exact` sums every kernel pair within 9 kernel standard deviations (the
/// omitted tail is below 3e-18 of the self term). `binned` linearly bins the
/// particles onto a lattice with spacing √ε/32, convolves with the sampled
/// kernel and interpolates back; its relative error is O(1e-4). `automatic`
/// picks `exact` up to 2048 particles.
enum class DensityEvaluation { automatic, exact, binned };

inline constexpr std::size_t exact_density_limit = 2048;

struct MixtureValues {
  std::vector<double> density;     ///< p̃ at each point
  std::vector<double> derivative;  ///< ∂p̃/∂x at each point
};

/// Evaluates p̃(x) = (1/N) Σ_j N(x; X_j, variance) and its derivative at the
/// mixture centres themselves. `sorted` must be nondecreasing; results are
/// in the same order.
MixtureValues gaussian_mixture_at_points(std::span<const double> sorted, double variance,
                                         DensityEvaluation method = DensityEvaluation::automatic);

}  // namespace fpf
