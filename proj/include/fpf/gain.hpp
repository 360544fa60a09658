#pragma once

#include "fpf/kernel_density.hpp"
#include "fpf/model.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace fpf {

enum class GainMethod { exact_linear, dns, fourier_circle };

GainMethod gain_method_from_name(std::string_view name);
std::string_view to_string(GainMethod method);

/// Gain K and its spatial derivative K′ at one particle.
struct GainSample {
  double k = 0.0;
  double k_prime = 0.0;
};

/// Gain evaluated at every particle, in the caller's particle order.
struct GainField {
  std::vector<GainSample> at_particles;
  GainMethod method = GainMethod::exact_linear;
  /// Particles whose |K| was capped at DnsOptions::gain_cap.
  std::size_t clipped = 0;
  /// Particles whose density estimate was raised to the density floor.
  std::size_t floored = 0;
  /// Kernel variance ε actually used (DNS only).
  double bandwidth = 0.0;
};

/// First-harmonic Fourier coefficients of the particle density on the circle.
struct FourierGainCoeffs {
  double p_c = 0.0;
  double p_s = 0.0;
};

/// Linear-Gaussian gain Σγ/σ_W², constant in x.
double kalman_gain_scalar(double variance, double gamma, double sigma_w);

/// Multivariable linear-Gaussian gain Σγ/σ_W². Throws std::invalid_argument
/// on dimension mismatch or an asymmetric covariance.
Eigen::VectorXd kalman_gain_vector(const Eigen::MatrixXd& cov, const Eigen::VectorXd& gamma,
                                   double sigma_w);

/// max_{i,j,k} |K_i (Σ⁻¹)_{jk} − K_j (Σ⁻¹)_{ik}| for the Kalman gain K.
///
/// Zero iff p·K can be written as a gradient for this Gaussian density;
/// for d ≥ 2 and K ≠ 0 it is strictly positive. Throws std::invalid_argument
/// when cov is singular.
double check_gradient_condition(const Eigen::MatrixXd& cov, const Eigen::VectorXd& gamma,
                                double sigma_w);

/// Default kernel variance max(1e-4, σ̂ N^(-2/5)), σ̂ the sample standard
/// deviation of the positions.
double default_bandwidth(std::span<const double> positions);

struct DnsOptions {
  /// Kernel variance ε; default_bandwidth() when empty.
  std::optional<double> bandwidth;
  DensityEvaluation density = DensityEvaluation::automatic;
  /// p̃ is clipped below at density_floor · max_j p̃(X^j).
  double density_floor = 1e-6;
  /// |K| is clipped at gain_cap.
  double gain_cap = 1e4;
};

/// Direct numerical gain at the particles from the empirical measure and a
/// sum-of-Gaussians density estimate:
///
///   K(X^i) = 1/(σ_W² N p̃(X^i)) (Σ_{j: X^j < X^i} (ĥ − h(X^j)) + ½(ĥ − h(X^i)))
///   K′(X^i) = (ĥ − h(X^i))/σ_W² − b̃(X^i) K(X^i),   b̃ = ∂ ln p̃ / ∂x.
///
/// The Heaviside sums come from one sort plus a prefix sum; coincident
/// particles contribute only through their own ½-weighted term.
/// Throws std::invalid_argument when N < 2, ε ≤ 0 or a position is not finite.
GainField dns_gain(std::span<const double> positions, const ScalarDiffusionModel& model,
                   const DnsOptions& options = {});
GainField dns_gain(std::span<const double> positions, const ScalarDiffusionModel& model,
                   double bandwidth);

/// P_c = (1/πN) Σ cos θ_j,  P_s = (1/πN) Σ sin θ_j.
FourierGainCoeffs fourier_coefficients(std::span<const double> angles);

/// Perturbative gain on the circle for h(θ) = ½(1 + cos θ):
///
///   K(θ) = −sin θ/(2σ_W²) + π/(4σ_W²) (P_c sin 2θ − P_s cos 2θ).
///
/// Higher harmonics are ignored. Throws std::invalid_argument for an empty
/// ensemble or non-finite angles.
GainField fourier_gain_circle(std::span<const double> angles, double sigma_w);

/// K for a single angle given precomputed coefficients.
GainSample fourier_gain_at(double theta, const FourierGainCoeffs& coeffs, double sigma_w);

/// Kalman gain Σ^(N)γ/σ_W² from the ensemble's sample variance, K′ = 0.
GainField exact_linear_gain(std::span<const double> positions, const LinearModelParams& params);

/// CSV with header `particle,x,K,Kprime`.
void write_gain_csv(std::span<const double> positions, const GainField& gain, std::ostream& out);

}  // namespace fpf
