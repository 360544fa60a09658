#pragma once

#include "fpf/gain.hpp"
#include "fpf/model.hpp"
#include "fpf/random.hpp"
#include "fpf/simulate.hpp"

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

namespace fpf {

/// Discretization of the particle SDE.
///
/// `stratonovich_euler` is the plain Euler step with the gain frozen at the
/// pre-update particle. `ito` adds the Wong-Zakai drift Ω Δt with
/// Ω = ½σ_W² K K′.
enum class FpfForm { stratonovich_euler, ito };

FpfForm fpf_form_from_name(std::string_view name);
std::string_view to_string(FpfForm form);

struct ParticleEnsemble {
  std::vector<double> positions;
  Geometry geometry = Geometry::line;
  double time = 0.0;
  std::size_t step = 0;

  std::size_t size() const noexcept { return positions.size(); }
  /// Throws std::invalid_argument if N < 2, a position is non-finite, or a
  /// circle position lies outside [0, 2π).
  void validate() const;
};

/// Ensemble summary. On the circle `mean` is the circular mean and
/// `variance` the dispersion 1 − R, R the mean resultant length.
struct FilterEstimate {
  double mean = 0.0;
  double variance = 0.0;
  double h_hat = 0.0;
  double time = 0.0;
  /// Circle only: the mean direction is undefined (R ≈ 0) and `mean` is 0.
  bool degenerate = false;
};

struct FpfOptions {
  GainMethod gain_method = GainMethod::exact_linear;
  FpfForm form = FpfForm::stratonovich_euler;
  DnsOptions dns;
};

/// Per-step internals, filled when requested.
struct StepTrace {
  double h_hat = 0.0;
  GainField gain;
  std::vector<double> innovations;
  bool degenerate = false;
};

/// Mean, unbiased variance and ĥ^(N) on the line; circular mean,
/// dispersion and ĥ^(N) on the circle. Throws std::invalid_argument if N < 2.
FilterEstimate estimate(const ParticleEnsemble& ensemble, const ScalarDiffusionModel& model);

/// Draws N particles from the model's initial law.
ParticleEnsemble initial_ensemble(const ScalarDiffusionModel& model, std::size_t n,
                                  RandomStream& stream);

/// Gain for the current ensemble. Throws std::invalid_argument when the
/// method does not fit the model (exact_linear needs a linear model,
/// fourier_circle needs circle geometry).
GainField compute_gain(const ParticleEnsemble& ensemble, const ScalarDiffusionModel& model,
                       const FpfOptions& options);

/// One step of the discrete feedback particle filter
///
///   X^i ← X^i + a(X^i)Δt + σ_B√Δt ΔV^i + K(X^i) ΔI^i [+ Ω(X^i) Δt],
///   ΔI^i = ΔZ − ½(h(X^i) + ĥ^(N))Δt,
///
/// with ĥ^(N) and K computed from the pre-update ensemble. `noise[i]` is the
/// standard normal ΔV for particle i. Throws DivergenceError naming the step
/// and particle if a position becomes non-finite or exceeds 1e100 in magnitude.
ParticleEnsemble fpf_step(const ParticleEnsemble& ensemble, const ScalarDiffusionModel& model,
                          const FpfOptions& options, double dz, double dt,
                          std::span<const double> noise, StepTrace* trace = nullptr);

/// As above, drawing the N noise samples from `stream` in particle order.
ParticleEnsemble fpf_step(const ParticleEnsemble& ensemble, const ScalarDiffusionModel& model,
                          const FpfOptions& options, double dz, double dt, RandomStream& stream,
                          StepTrace* trace = nullptr);

struct FpfRun {
  /// One estimate per observation increment, taken after the update.
  std::vector<FilterEstimate> estimates;
  /// Monotonic wall time spent inside the iteration loop.
  double loop_seconds = 0.0;
  std::size_t clipped_gains = 0;
  std::size_t floored_densities = 0;
  std::size_t degenerate_steps = 0;
};

/// Runs the filter over `truth`, starting from N draws of the initial law.
/// Throws std::invalid_argument for an empty truth path.
FpfRun run_fpf(const ScalarDiffusionModel& model, const FpfOptions& options,
               const TruthPath& truth, std::size_t n_particles, RandomStream stream);

/// CSV with header `t,mean,variance,h_hat`.
void write_estimates_csv(std::span<const FilterEstimate> estimates, std::ostream& out);

}  // namespace fpf
