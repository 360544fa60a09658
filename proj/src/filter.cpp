#include "fpf/filter.hpp"

#include "fpf/csv.hpp"
#include "fpf/errors.hpp"
#include "fpf/statistics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>

namespace fpf {

namespace {

// Beyond this the ensemble's second moment is no longer representable.
constexpr double kMaxMagnitude = 1e100;

}  // namespace

FpfForm fpf_form_from_name(std::string_view name) {
  if (name == "stratonovich_euler") return FpfForm::stratonovich_euler;
  if (name == "ito") return FpfForm::ito;
  throw std::invalid_argument("unknown form '" + std::string(name) + "'");
}

std::string_view to_string(FpfForm form) {
  return form == FpfForm::ito ? "ito" : "stratonovich_euler";
}

void ParticleEnsemble::validate() const {
  if (positions.size() < 2) {
    throw std::invalid_argument("ensemble needs at least two particles");
  }
  for (double x : positions) {
    if (!std::isfinite(x)) {
      throw std::invalid_argument("ensemble has a non-finite particle");
    }
    if (geometry == Geometry::circle && (x < 0.0 || x >= two_pi)) {
      throw std::invalid_argument("circle particle outside [0, 2pi)");
    }
  }
}

FilterEstimate estimate(const ParticleEnsemble& ensemble, const ScalarDiffusionModel& model) {
  const auto& x = ensemble.positions;
  if (x.size() < 2) {
    throw std::invalid_argument("estimate: need at least two particles");
  }
  FilterEstimate est;
  est.time = ensemble.time;
  double h_sum = 0.0;
  for (double v : x) {
    h_sum += model.obs(v);
  }
  est.h_hat = h_sum / static_cast<double>(x.size());

  if (ensemble.geometry == Geometry::line) {
    est.mean = sample_mean(x);
    est.variance = sample_variance(x);
    return est;
  }

  const FourierGainCoeffs c = fourier_coefficients(x);
  const double resultant = std::numbers::pi * std::hypot(c.p_c, c.p_s);
  if (resultant < 1e-12) {
    est.degenerate = true;
    est.mean = 0.0;
  } else {
    est.mean = wrap_angle(std::atan2(c.p_s, c.p_c));
  }
  est.variance = std::clamp(1.0 - resultant, 0.0, 1.0);
  return est;
}

ParticleEnsemble initial_ensemble(const ScalarDiffusionModel& model, std::size_t n,
                                  RandomStream& stream) {
  ParticleEnsemble ens;
  ens.geometry = model.geometry();
  ens.positions.resize(n);
  for (double& x : ens.positions) {
    x = model.initial_law().sample(stream);
    if (ens.geometry == Geometry::circle) {
      x = wrap_angle(x);
    }
  }
  return ens;
}

GainField compute_gain(const ParticleEnsemble& ensemble, const ScalarDiffusionModel& model,
                       const FpfOptions& options) {
  switch (options.gain_method) {
    case GainMethod::exact_linear:
      if (!model.linear_params()) {
        throw std::invalid_argument("exact_linear gain requires a linear model");
      }
      return exact_linear_gain(ensemble.positions, *model.linear_params());
    case GainMethod::dns:
      if (model.geometry() != Geometry::line) {
        throw std::invalid_argument("dns gain requires line geometry");
      }
      return dns_gain(ensemble.positions, model, options.dns);
    case GainMethod::fourier_circle:
      if (model.geometry() != Geometry::circle) {
        throw std::invalid_argument("fourier_circle gain requires circle geometry");
      }
      return fourier_gain_circle(ensemble.positions, model.sigma_w());
  }
  throw std::invalid_argument("unknown gain method");
}

ParticleEnsemble fpf_step(const ParticleEnsemble& ensemble, const ScalarDiffusionModel& model,
                          const FpfOptions& options, double dz, double dt,
                          std::span<const double> noise, StepTrace* trace) {
  if (!(dt > 0.0)) {
    throw std::invalid_argument("fpf_step: dt must be positive");
  }
  if (ensemble.geometry != model.geometry()) {
    throw std::invalid_argument("fpf_step: ensemble and model geometry differ");
  }
  ensemble.validate();
  const std::size_t n = ensemble.size();
  if (noise.size() != n) {
    throw std::invalid_argument("fpf_step: one noise sample per particle required");
  }

  std::vector<double> h;
  h.reserve(n);
  double h_sum = 0.0;
  for (double x : ensemble.positions) {
    h.push_back(model.obs(x));
    h_sum += h.back();
  }
  const double h_hat = h_sum / static_cast<double>(n);

  GainField gain = compute_gain(ensemble, model, options);

  const bool circle = model.geometry() == Geometry::circle;
  const bool ito = options.form == FpfForm::ito;
  const double sqrt_dt = std::sqrt(dt);
  const double half_var_w = 0.5 * model.sigma_w() * model.sigma_w();

  ParticleEnsemble next;
  next.geometry = ensemble.geometry;
  next.time = ensemble.time + dt;
  next.step = ensemble.step + 1;
  next.positions.reserve(n);
  if (trace) {
    trace->innovations.resize(n);
  }

  for (std::size_t i = 0; i < n; ++i) {
    const double x = ensemble.positions[i];
    const GainSample g = gain.at_particles[i];
    const double innovation = dz - 0.5 * (h[i] + h_hat) * dt;
    double y = euler_maruyama_step(model, x, dt, sqrt_dt, noise[i]) + g.k * innovation;
    if (ito) {
      y += half_var_w * g.k * g.k_prime * dt;
    }
    if (!(std::abs(y) <= kMaxMagnitude)) {
      throw DivergenceError(ensemble.step, i,
                            "fpf diverged at step " + std::to_string(ensemble.step) +
                                ", particle " + std::to_string(i));
    }
    next.positions.push_back(circle ? wrap_angle(y) : y);
    if (trace) {
      trace->innovations[i] = innovation;
    }
  }

  if (trace) {
    const auto [lo, hi] = std::minmax_element(ensemble.positions.begin(), ensemble.positions.end());
    trace->degenerate = *lo == *hi;
    trace->h_hat = h_hat;
    trace->gain = std::move(gain);
  }
  return next;
}

ParticleEnsemble fpf_step(const ParticleEnsemble& ensemble, const ScalarDiffusionModel& model,
                          const FpfOptions& options, double dz, double dt, RandomStream& stream,
                          StepTrace* trace) {
  std::vector<double> noise(ensemble.size());
  stream.fill_normal(noise);
  return fpf_step(ensemble, model, options, dz, dt, noise, trace);
}

FpfRun run_fpf(const ScalarDiffusionModel& model, const FpfOptions& options,
               const TruthPath& truth, std::size_t n_particles, RandomStream stream) {
  if (truth.steps() == 0) {
    throw std::invalid_argument("run_fpf: truth path has no observation increments");
  }
  if (n_particles < 2) {
    throw std::invalid_argument("run_fpf: need at least two particles");
  }
  ParticleEnsemble ensemble = initial_ensemble(model, n_particles, stream);

  FpfRun run;
  run.estimates.reserve(truth.steps());
  std::vector<double> noise(n_particles);
  StepTrace trace;

  const auto start = std::chrono::steady_clock::now();
  for (std::size_t k = 0; k < truth.steps(); ++k) {
    stream.fill_normal(noise);
    ensemble = fpf_step(ensemble, model, options, truth.obs_increments[k], truth.dt, noise, &trace);
    ensemble.time = truth.times[k + 1];
    run.clipped_gains += trace.gain.clipped;
    run.floored_densities += trace.gain.floored;
    run.degenerate_steps += trace.degenerate ? 1 : 0;
    run.estimates.push_back(estimate(ensemble, model));
  }
  run.loop_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return run;
}

void write_estimates_csv(std::span<const FilterEstimate> estimates, std::ostream& out) {
  out << "t,mean,variance,h_hat\n";
  for (const FilterEstimate& e : estimates) {
    out << format_double(e.time) << ',' << format_double(e.mean) << ','
        << format_double(e.variance) << ',' << format_double(e.h_hat) << '\n';
  }
}

}  // namespace fpf
