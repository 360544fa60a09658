#include "fpf/oracle.hpp"

#include "fpf/csv.hpp"
#include "fpf/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

namespace fpf {

namespace {

constexpr double kBoundaryMassLimit = 1e-6;
constexpr double kStabilityFraction = 0.9;

/// z / (e^z − 1), the Bernoulli function of exponentially fitted fluxes.
double bernoulli(double z) {
  if (std::abs(z) < 1e-8) {
    return 1.0 - 0.5 * z;
  }
  return z / std::expm1(z);
}

double boundary_mass(const GridDensity& d) {
  if (d.periodic) {
    return 0.0;
  }
  const std::size_t last = d.nodes() - 1;
  return d.weight(0) * d.values[0] + d.weight(last) * d.values[last];
}

}  // namespace

GridDensity GridDensity::from_function(double lo, double hi, std::size_t n_cells,
                                       const std::function<double(double)>& f, bool periodic) {
  if (!(hi > lo) || n_cells < 2) {
    throw std::invalid_argument("grid: need hi > lo and at least two cells");
  }
  GridDensity g;
  g.grid_lo = lo;
  g.grid_hi = hi;
  g.n_cells = n_cells;
  g.periodic = periodic;
  g.dx = (hi - lo) / static_cast<double>(n_cells);
  g.values.resize(periodic ? n_cells : n_cells + 1);
  for (std::size_t i = 0; i < g.values.size(); ++i) {
    g.values[i] = std::max(0.0, f(g.x(i)));
  }
  return g;
}

double GridDensity::weight(std::size_t i) const noexcept {
  if (!periodic && (i == 0 || i + 1 == values.size())) {
    return 0.5 * dx;
  }
  return dx;
}

double GridDensity::integral() const {
  double s = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    s += weight(i) * values[i];
  }
  return s;
}

double GridDensity::integrate(const std::function<double(double)>& f) const {
  double s = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    s += weight(i) * f(x(i)) * values[i];
  }
  return s;
}

void GridDensity::normalize() {
  const double mass = integral();
  if (!(mass > 0.0) || !std::isfinite(mass)) {
    throw std::runtime_error("grid density has no mass to normalize");
  }
  for (double& v : values) {
    v /= mass;
  }
}

double GridDensity::mean() const {
  return integrate([](double x) { return x; }) / integral();
}

double GridDensity::variance() const {
  const double m = mean();
  return integrate([m](double x) { return (x - m) * (x - m); }) / integral();
}

GridSpec default_grid(const ScalarDiffusionModel& model, std::size_t n_cells) {
  if (model.geometry() == Geometry::circle) {
    return GridSpec{0.0, two_pi, n_cells, true};
  }
  double spread = std::sqrt(model.init_var());
  if (const auto& lin = model.linear_params(); lin && lin->alpha < 0.0) {
    spread = std::max(spread, lin->sigma_b / std::sqrt(-2.0 * lin->alpha));
  }
  if (!(spread > 0.0)) {
    spread = 1.0;
  }
  const double centre = model.init_mean();
  return GridSpec{centre - 8.0 * spread, centre + 8.0 * spread, n_cells, false};
}

GridDensity fp_step(const GridDensity& density, const ScalarDiffusionModel& model, double dt,
                    FpStepInfo* info) {
  if (!(dt > 0.0)) {
    throw std::invalid_argument("fp_step: dt must be positive");
  }
  const std::size_t n = density.nodes();
  const std::size_t faces = density.periodic ? n : n - 1;
  const double diff = 0.5 * model.sigma_b() * model.sigma_b();
  const double dx = density.dx;

  // Flux through face f (between node f and f+1): F = fwd·p_f − back·p_{f+1}.
  std::vector<double> fwd(faces);
  std::vector<double> back(faces);
  bool still = true;
  for (std::size_t f = 0; f < faces; ++f) {
    const double a = model.drift(density.x(f) + 0.5 * dx);
    if (diff > 0.0) {
      const double pe = a * dx / diff;
      fwd[f] = diff / dx * bernoulli(-pe);
      back[f] = diff / dx * bernoulli(pe);
    } else {
      fwd[f] = std::max(a, 0.0);
      back[f] = std::max(-a, 0.0);
    }
    still = still && fwd[f] == 0.0 && back[f] == 0.0;
  }
  if (still) {
    if (info) {
      *info = FpStepInfo{0, 0.0, density.integral()};
    }
    return density;
  }

  double max_rate = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double out = 0.0;
    if (density.periodic || i + 1 < n) {
      out += fwd[i % faces];
    }
    if (density.periodic || i > 0) {
      out += back[(i + faces - 1) % faces];
    }
    max_rate = std::max(max_rate, out / density.weight(i));
  }
  const auto substeps =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(dt * max_rate / kStabilityFraction)));
  const double h = dt / static_cast<double>(substeps);

  GridDensity out = density;
  std::vector<double> flux(faces);
  double clipped = 0.0;
  for (std::size_t s = 0; s < substeps; ++s) {
    auto& p = out.values;
    for (std::size_t f = 0; f < faces; ++f) {
      flux[f] = fwd[f] * p[f] - back[f] * p[(f + 1) % n];
    }
    for (std::size_t i = 0; i < n; ++i) {
      double inflow = 0.0;
      if (density.periodic || i > 0) {
        inflow += flux[(i + faces - 1) % faces];
      }
      if (density.periodic || i + 1 < n) {
        inflow -= flux[i];
      }
      p[i] += h / out.weight(i) * inflow;
      if (p[i] < 0.0) {
        clipped -= out.weight(i) * p[i];
        p[i] = 0.0;
      }
    }
  }
  const double mass = out.integral();
  out.normalize();
  if (info) {
    *info = FpStepInfo{substeps, clipped, mass};
  }
  return out;
}

void bayes_update(GridDensity& density, const ScalarDiffusionModel& model, double dz, double dt) {
  const double scale = 1.0 / (2.0 * model.sigma_w() * model.sigma_w() * dt);
  std::vector<double> loglik(density.nodes());
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < density.nodes(); ++i) {
    const double r = dz - model.obs(density.x(i)) * dt;
    loglik[i] = -r * r * scale;
    if (density.values[i] > 0.0) {
      best = std::max(best, loglik[i]);
    }
  }
  if (!std::isfinite(best)) {
    throw std::runtime_error("bayes_update: density has no support");
  }
  for (std::size_t i = 0; i < density.nodes(); ++i) {
    density.values[i] *= std::exp(loglik[i] - best);
  }
  density.normalize();
}

namespace {

KsSummary summarize(const GridDensity& d, const ScalarDiffusionModel& model, double time) {
  KsSummary s;
  s.time = time;
  s.h_hat = d.integrate([&model](double x) { return model.obs(x); });
  if (d.periodic) {
    const double c = d.integrate([](double x) { return std::cos(x); });
    const double sn = d.integrate([](double x) { return std::sin(x); });
    const double r = std::hypot(c, sn);
    s.mean = r < 1e-12 ? 0.0 : wrap_angle(std::atan2(sn, c));
    s.variance = std::clamp(1.0 - r, 0.0, 1.0);
  } else {
    s.mean = d.mean();
    s.variance = d.variance();
  }
  return s;
}

}  // namespace

KsRun ks_filter_run(const ScalarDiffusionModel& model, const TruthPath& truth,
                    const GridSpec& grid, std::span<const double> snapshot_times) {
  if (truth.steps() == 0) {
    throw std::invalid_argument("ks_filter_run: truth path has no observation increments");
  }
  if ((model.geometry() == Geometry::circle) != grid.periodic) {
    throw std::invalid_argument("ks_filter_run: circle models need a periodic grid and vice versa");
  }
  const InitialLaw& law = model.initial_law();
  if (law.kind != InitialLaw::Kind::uniform_circle && !(law.variance > 0.0)) {
    throw std::invalid_argument("ks_filter_run: the prior must have a density");
  }
  GridDensity p = GridDensity::from_function(
      grid.lo, grid.hi, grid.n_cells, [&law](double x) { return law.density(x); }, grid.periodic);
  p.normalize();
  if (boundary_mass(p) > kBoundaryMassLimit) {
    throw GridTooSmallError(0, "prior mass at the grid boundary; widen the grid");
  }

  std::vector<double> pending(snapshot_times.begin(), snapshot_times.end());
  std::sort(pending.begin(), pending.end());
  std::size_t next_snapshot = 0;

  KsRun run;
  run.summaries.reserve(truth.steps());
  const auto start = std::chrono::steady_clock::now();
  for (std::size_t k = 0; k < truth.steps(); ++k) {
    bayes_update(p, model, truth.obs_increments[k], truth.dt);
    FpStepInfo info;
    p = fp_step(p, model, truth.dt, &info);
    run.clipped_mass += info.clipped_mass;
    if (boundary_mass(p) > kBoundaryMassLimit) {
      throw GridTooSmallError(k, "posterior mass reached the grid boundary at step " +
                                     std::to_string(k));
    }
    const double t = truth.times[k + 1];
    run.summaries.push_back(summarize(p, model, t));
    while (next_snapshot < pending.size() && t >= pending[next_snapshot] - 1e-12) {
      run.snapshots.emplace_back(t, p);
      ++next_snapshot;
    }
  }
  run.loop_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return run;
}

std::vector<double> quadrature_gain(const GridDensity& density, const ScalarDiffusionModel& model) {
  if (density.periodic) {
    throw std::invalid_argument("quadrature_gain: line grids only");
  }
  const std::size_t n = density.nodes();
  const double mass = density.integral();
  if (!(mass > 0.0)) {
    throw std::invalid_argument("quadrature_gain: density has no mass");
  }
  const auto& p = density.values;
  std::vector<double> h(n);
  for (std::size_t i = 0; i < n; ++i) {
    h[i] = model.obs(density.x(i));
  }
  // Averaging h − h[0] keeps ĥ − h exactly zero for constant h.
  double hp = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    hp += density.weight(i) * (h[i] - h[0]) * p[i];
  }
  const double h_shift = hp / mass;

  std::vector<double> integrand(n);
  for (std::size_t i = 0; i < n; ++i) {
    integrand[i] = (h_shift - (h[i] - h[0])) * p[i];
  }
  const double half_dx = 0.5 * density.dx;
  std::vector<double> left(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    left[i] = left[i - 1] + half_dx * (integrand[i - 1] + integrand[i]);
  }
  std::vector<double> right(n, 0.0);
  for (std::size_t i = n - 1; i-- > 0;) {
    right[i] = right[i + 1] - half_dx * (integrand[i] + integrand[i + 1]);
  }
  const auto switch_at = static_cast<std::size_t>(
      std::distance(left.begin(), std::max_element(left.begin(), left.end())));

  const double p_max = *std::max_element(p.begin(), p.end());
  const double floor = 1e-9 * p_max;
  const double inv_var_w = 1.0 / (model.sigma_w() * model.sigma_w());
  std::vector<double> gain(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double numerator = i <= switch_at ? left[i] : right[i];
    // p is normalized implicitly: both numerator and denominator scale with mass.
    gain[i] = numerator * inv_var_w / std::max(p[i], floor);
  }
  return gain;
}

void write_density_csv(const GridDensity& density, std::ostream& out) {
  out << "x,p\n";
  for (std::size_t i = 0; i < density.nodes(); ++i) {
    out << format_double(density.x(i)) << ',' << format_double(density.values[i]) << '\n';
  }
}

}  // namespace fpf
