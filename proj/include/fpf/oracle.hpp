#pragma once

#include "fpf/model.hpp"
#include "fpf/simulate.hpp"

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

namespace fpf {

/// Density sampled on a uniform 1-D grid.
///
/// On the line there are n_cells + 1 nodes x_i = lo + i·dx spanning
/// [lo, hi] and integrals use the trapezoid rule. Periodic grids (circle
/// models) have n_cells nodes on [lo, hi) with hi identified with lo.
struct GridDensity {
  double grid_lo = 0.0;
  double grid_hi = 1.0;
  std::size_t n_cells = 0;
  std::vector<double> values;
  double dx = 0.0;
  bool periodic = false;

  static GridDensity from_function(double lo, double hi, std::size_t n_cells,
                                   const std::function<double(double)>& f, bool periodic = false);

  std::size_t nodes() const noexcept { return values.size(); }
  double x(std::size_t i) const noexcept { return grid_lo + static_cast<double>(i) * dx; }
  /// Quadrature weight of node i (dx, halved at the ends of a line grid).
  double weight(std::size_t i) const noexcept;

  double integral() const;
  /// ∫ f(x) p(x) dx.
  double integrate(const std::function<double(double)>& f) const;
  /// Scales to unit integral. Throws std::runtime_error if the mass is zero.
  void normalize();
  double mean() const;
  double variance() const;
};

struct GridSpec {
  double lo = -8.0;
  double hi = 8.0;
  std::size_t n_cells = 800;
  bool periodic = false;
};

/// Grid used when none is given: [0, 2π) for circle models; otherwise the
/// prior mean ± 8 standard deviations, taking the larger of the prior's
/// spread and the stationary spread of a stable linear model.
GridSpec default_grid(const ScalarDiffusionModel& model, std::size_t n_cells = 800);

struct FpStepInfo {
  std::size_t substeps = 0;
  double clipped_mass = 0.0;
  /// Integral of the evolved density before renormalization.
  double mass_before_normalize = 1.0;
};

/// Advances the Kolmogorov forward equation ∂p/∂t = −∂(ap)/∂x + ½σ_B² ∂²p/∂x²
/// by dt with a conservative finite-volume scheme: exponentially fitted
/// (Scharfetter-Gummel) fluxes, which reduce to upwind drift when diffusion
/// is negligible and to centered diffusion when drift vanishes. Zero-flux
/// boundaries on the line. Sub-steps internally to stay within the explicit
/// stability bound; the result is renormalized.
GridDensity fp_step(const GridDensity& density, const ScalarDiffusionModel& model, double dt,
                    FpStepInfo* info = nullptr);

/// Multiplies by the Gaussian likelihood of ΔZ given h(x) over dt and renormalizes.
void bayes_update(GridDensity& density, const ScalarDiffusionModel& model, double dz, double dt);

struct KsSummary {
  double time = 0.0;
  double mean = 0.0;
  double variance = 0.0;
  double h_hat = 0.0;
};

struct KsRun {
  std::vector<KsSummary> summaries;
  std::vector<std::pair<double, GridDensity>> snapshots;
  double loop_seconds = 0.0;
  double clipped_mass = 0.0;
};

/// Grid solution of the nonlinear filtering problem by splitting: Bayes
/// update with ΔZ_k at t_k followed by a forward-equation step to t_{k+1}.
/// One summary per increment. Snapshots are stored at the first step whose
/// time reaches each requested time. Throws GridTooSmallError when the mass
/// in the outermost grid nodes exceeds 1e-6.
KsRun ks_filter_run(const ScalarDiffusionModel& model, const TruthPath& truth,
                    const GridSpec& grid, std::span<const double> snapshot_times = {});

/// Gain on the grid from the first-order form ∂(pK)/∂x = −(h − ĥ)p/σ_W²:
///
///   K(x) = (1/(σ_W² p(x))) ∫_lo^x (ĥ − h(y)) p(y) dy
///
/// by cumulative trapezoid, with p clipped below at 1e-9·max p. The integral
/// is accumulated from whichever end keeps it free of cancellation, so both
/// boundary values of pK are exactly zero. Line grids only.
std::vector<double> quadrature_gain(const GridDensity& density, const ScalarDiffusionModel& model);

/// CSV with header `x,p`.
void write_density_csv(const GridDensity& density, std::ostream& out);

}  // namespace fpf
