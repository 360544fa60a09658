#pragma once

#include "fpf/filter.hpp"
#include "fpf/model.hpp"
#include "fpf/random.hpp"
#include "fpf/simulate.hpp"

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace fpf {

// ---------------------------------------------------------------------------
// Kalman-Bucy filter
// ---------------------------------------------------------------------------

struct KalmanState {
  double mean = 0.0;
  double variance = 0.0;
  double time = 0.0;
};

/// Euler discretization of the Kalman-Bucy filter at the truth's dt:
///
///   μ ← μ + αμΔt + (Σγ/σ_W²)(ΔZ − γμΔt)
///   Σ ← Σ + (2αΣ + σ_B² − γ²Σ²/σ_W²)Δt
///
/// Returns one state per increment (after the update). Throws
/// DivergenceError if Σ becomes nonpositive after a step starting from a
/// positive value, which means dt is too large for the Riccati flow.
std::vector<KalmanState> kalman_bucy_run(const LinearModelParams& params, const TruthPath& truth);

/// Same, with an explicit initial state (Σ₀ overrides params.init_var).
std::vector<KalmanState> kalman_bucy_run(const LinearModelParams& params, const TruthPath& truth,
                                         double initial_mean, double initial_variance);

// ---------------------------------------------------------------------------
// Bootstrap particle filter
// ---------------------------------------------------------------------------

struct WeightedEnsemble {
  std::vector<double> positions;
  std::vector<double> weights;
  double ess = 0.0;

  /// Equal weights 1/N.
  static WeightedEnsemble uniform(std::vector<double> positions);

  std::size_t size() const noexcept { return positions.size(); }
  /// Throws std::invalid_argument unless sizes agree, weights are
  /// nonnegative and sum to 1 within 1e-9.
  void validate() const;
};

/// Effective sample size 1/Σw².
double effective_sample_size(std::span<const double> weights);

/// Systematic resampling with offset u ∈ [0,1): output index k selects the
/// particle whose cumulative weight first exceeds (u + k)/n_out. Particle i
/// is selected ⌊n_out·w_i⌋ or ⌈n_out·w_i⌉ times. n_out = 0 means
/// weights.size(). Throws std::invalid_argument for unnormalized or negative
/// weights or u outside [0,1).
std::vector<std::size_t> systematic_resample(std::span<const double> weights, double u,
                                             std::size_t n_out = 0);

/// Propagates every particle by Euler-Maruyama, multiplies its weight by
/// the continuous-time likelihood factor exp((h ΔZ − ½h²Δt)/σ_W²),
/// renormalizes, and resamples systematically when ESS < threshold·N.
///
/// Throws FilterCollapseError when every weight underflows to zero and
/// DivergenceError when a position or the weight sum is not finite.
WeightedEnsemble bootstrap_step(const WeightedEnsemble& ensemble,
                                const ScalarDiffusionModel& model, double dz, double dt,
                                RandomStream& stream, double resample_threshold = 0.5,
                                std::size_t step_index = 0, bool* resampled = nullptr);

/// Weighted mean/variance (and weighted ĥ) of the ensemble.
FilterEstimate weighted_estimate(const WeightedEnsemble& ensemble,
                                 const ScalarDiffusionModel& model, double time);

struct BootstrapRun {
  std::vector<FilterEstimate> estimates;
  double loop_seconds = 0.0;
  std::size_t resamples = 0;
};

BootstrapRun run_bootstrap(const ScalarDiffusionModel& model, const TruthPath& truth,
                           std::size_t n_particles, RandomStream stream,
                           double resample_threshold = 0.5);

}  // namespace fpf
