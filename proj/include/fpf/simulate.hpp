#pragma once

#include "fpf/model.hpp"
#include "fpf/random.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace fpf {

/// Sampled signal path and observation increments.
///
/// `times` and `states` have steps()+1 entries (t₀ = 0 through t_n);
/// `obs_increments[k]` is ΔZ over [t_k, t_{k+1}).
struct TruthPath {
  std::vector<double> times;
  std::vector<double> states;
  std::vector<double> obs_increments;
  double dt = 0.0;

  std::size_t steps() const noexcept { return obs_increments.size(); }
};

/// One Euler-Maruyama step x + a(x)Δt + σ_B√Δt ξ, without wrapping.
/// Shared by the truth simulator and every particle filter.
inline double euler_maruyama_step(const ScalarDiffusionModel& model, double x, double dt,
                                  double sqrt_dt, double xi) {
  return x + model.drift(x) * dt + model.sigma_b() * sqrt_dt * xi;
}

/// Number of steps of size dt in horizon. Throws std::invalid_argument unless
/// dt > 0, horizon ≥ dt and dt divides horizon within 1e-9 relative.
std::size_t step_count(double dt, double horizon);

/// Euler-Maruyama simulation of the signal and ΔZ_k = h(X_k)Δt + σ_W√Δt η_k.
///
/// X₀ is drawn from the model's initial law using `stream`; each step then
/// draws ξ_k followed by η_k. Throws DivergenceError naming the first step
/// that produced a non-finite state.
TruthPath simulate_truth(const ScalarDiffusionModel& model, double dt, double horizon,
                         RandomStream stream);

/// CSV with header `t,x,dz`. The final row carries the terminal state and an
/// empty dz field.
void write_truth_csv(const TruthPath& truth, std::ostream& out);

/// FNV-1a over the bit patterns of the observation increments.
std::uint64_t increments_hash(const TruthPath& truth);

}  // namespace fpf
