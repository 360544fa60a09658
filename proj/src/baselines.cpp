#include "fpf/baselines.hpp"

#include "fpf/errors.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fpf {

std::vector<KalmanState> kalman_bucy_run(const LinearModelParams& params, const TruthPath& truth) {
  return kalman_bucy_run(params, truth, params.init_mean, params.init_var);
}

std::vector<KalmanState> kalman_bucy_run(const LinearModelParams& params, const TruthPath& truth,
                                         double initial_mean, double initial_variance) {
  params.validate();
  if (!(truth.dt > 0.0) || truth.times.size() != truth.steps() + 1) {
    throw std::invalid_argument("kalman_bucy_run: malformed truth path");
  }
  if (!(initial_variance >= 0.0)) {
    throw std::invalid_argument("kalman_bucy_run: negative initial variance");
  }
  const double dt = truth.dt;
  const double var_w = params.sigma_w * params.sigma_w;
  const double var_b = params.sigma_b * params.sigma_b;
  const double g = params.gamma;

  std::vector<KalmanState> out;
  out.reserve(truth.steps());
  double mu = initial_mean;
  double sigma = initial_variance;
  for (std::size_t k = 0; k < truth.steps(); ++k) {
    const double gain = sigma * g / var_w;
    const double next_mu = mu + params.alpha * mu * dt + gain * (truth.obs_increments[k] - g * mu * dt);
    const double next_sigma =
        sigma + (2.0 * params.alpha * sigma + var_b - g * g * sigma * sigma / var_w) * dt;
    if (next_sigma < 0.0 || (next_sigma == 0.0 && sigma > 0.0) || !std::isfinite(next_mu)) {
      throw DivergenceError(k, std::nullopt,
                            "Kalman-Bucy variance became nonpositive at step " +
                                std::to_string(k) + " (dt too large)");
    }
    mu = next_mu;
    sigma = next_sigma;
    out.push_back(KalmanState{mu, sigma, truth.times[k + 1]});
  }
  return out;
}

WeightedEnsemble WeightedEnsemble::uniform(std::vector<double> positions) {
  WeightedEnsemble ens;
  const std::size_t n = positions.size();
  ens.positions = std::move(positions);
  ens.weights.assign(n, n == 0 ? 0.0 : 1.0 / static_cast<double>(n));
  ens.ess = static_cast<double>(n);
  return ens;
}

void WeightedEnsemble::validate() const {
  if (positions.size() != weights.size() || positions.empty()) {
    throw std::invalid_argument("weighted ensemble: size mismatch or empty");
  }
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("weighted ensemble: invalid weight");
    }
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("weighted ensemble: weights do not sum to one");
  }
}

double effective_sample_size(std::span<const double> weights) {
  double ss = 0.0;
  for (double w : weights) {
    ss += w * w;
  }
  return ss > 0.0 ? 1.0 / ss : 0.0;
}

std::vector<std::size_t> systematic_resample(std::span<const double> weights, double u,
                                             std::size_t n_out) {
  if (weights.empty()) {
    throw std::invalid_argument("systematic_resample: no weights");
  }
  if (!(u >= 0.0 && u < 1.0)) {
    throw std::invalid_argument("systematic_resample: offset must lie in [0, 1)");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("systematic_resample: invalid weight");
    }
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("systematic_resample: weights are not normalized");
  }
  if (n_out == 0) {
    n_out = weights.size();
  }

  std::vector<std::size_t> indices;
  indices.reserve(n_out);
  const double step = 1.0 / static_cast<double>(n_out);
  const std::size_t last = weights.size() - 1;
  std::size_t i = 0;
  double cumulative = weights[0];
  for (std::size_t k = 0; k < n_out; ++k) {
    const double target = (u + static_cast<double>(k)) * step;
    while (i < last && cumulative <= target) {
      ++i;
      cumulative += weights[i];
    }
    indices.push_back(i);
  }
  return indices;
}

WeightedEnsemble bootstrap_step(const WeightedEnsemble& ensemble,
                                const ScalarDiffusionModel& model, double dz, double dt,
                                RandomStream& stream, double resample_threshold,
                                std::size_t step_index, bool* resampled) {
  if (!(dt > 0.0)) {
    throw std::invalid_argument("bootstrap_step: dt must be positive");
  }
  if (!(resample_threshold > 0.0 && resample_threshold <= 1.0)) {
    throw std::invalid_argument("bootstrap_step: resample threshold must lie in (0, 1]");
  }
  ensemble.validate();
  const std::size_t n = ensemble.size();
  const bool circle = model.geometry() == Geometry::circle;
  const double sqrt_dt = std::sqrt(dt);
  const double inv_var_w = 1.0 / (model.sigma_w() * model.sigma_w());

  WeightedEnsemble next;
  next.positions.resize(n);
  next.weights.resize(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double x = euler_maruyama_step(model, ensemble.positions[i], dt, sqrt_dt, stream.normal());
    if (!std::isfinite(x)) {
      throw DivergenceError(step_index, i,
                            "bootstrap filter diverged at step " + std::to_string(step_index));
    }
    if (circle) {
      x = wrap_angle(x);
    }
    next.positions[i] = x;
    // The likelihood factor is evaluated at the pre-propagation state,
    // matching the ΔZ_k ~ h(X_k) convention of the simulator.
    const double h = model.obs(ensemble.positions[i]);
    const double w = ensemble.weights[i] * std::exp((h * dz - 0.5 * h * h * dt) * inv_var_w);
    next.weights[i] = w;
    sum += w;
  }
  if (!std::isfinite(sum)) {
    throw DivergenceError(step_index, std::nullopt,
                          "bootstrap weights overflowed at step " + std::to_string(step_index));
  }
  if (sum == 0.0) {
    throw FilterCollapseError(step_index,
                              "bootstrap weights collapsed at step " + std::to_string(step_index));
  }
  for (double& w : next.weights) {
    w /= sum;
  }
  next.ess = effective_sample_size(next.weights);

  // Relative guard so that exactly uniform weights never trigger at threshold 1.
  const bool resample =
      next.ess < resample_threshold * static_cast<double>(n) * (1.0 - 1e-9);
  if (resampled) {
    *resampled = resample;
  }
  if (resample) {
    const auto idx = systematic_resample(next.weights, stream.uniform());
    std::vector<double> chosen(n);
    for (std::size_t k = 0; k < n; ++k) {
      chosen[k] = next.positions[idx[k]];
    }
    next = WeightedEnsemble::uniform(std::move(chosen));
  }
  return next;
}

FilterEstimate weighted_estimate(const WeightedEnsemble& ensemble,
                                 const ScalarDiffusionModel& model, double time) {
  FilterEstimate est;
  est.time = time;
  const std::size_t n = ensemble.size();
  double h_hat = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    h_hat += ensemble.weights[i] * model.obs(ensemble.positions[i]);
  }
  est.h_hat = h_hat;

  if (model.geometry() == Geometry::circle) {
    double c = 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      c += ensemble.weights[i] * std::cos(ensemble.positions[i]);
      s += ensemble.weights[i] * std::sin(ensemble.positions[i]);
    }
    const double resultant = std::hypot(c, s);
    est.degenerate = resultant < 1e-12;
    est.mean = est.degenerate ? 0.0 : wrap_angle(std::atan2(s, c));
    est.variance = std::clamp(1.0 - resultant, 0.0, 1.0);
    return est;
  }

  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean += ensemble.weights[i] * ensemble.positions[i];
  }
  double var = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = ensemble.positions[i] - mean;
    var += ensemble.weights[i] * d * d;
  }
  est.mean = mean;
  est.variance = var;
  return est;
}

BootstrapRun run_bootstrap(const ScalarDiffusionModel& model, const TruthPath& truth,
                           std::size_t n_particles, RandomStream stream,
                           double resample_threshold) {
  if (truth.steps() == 0) {
    throw std::invalid_argument("run_bootstrap: truth path has no observation increments");
  }
  if (n_particles < 2) {
    throw std::invalid_argument("run_bootstrap: need at least two particles");
  }
  std::vector<double> init(n_particles);
  for (double& x : init) {
    x = model.initial_law().sample(stream);
    if (model.geometry() == Geometry::circle) {
      x = wrap_angle(x);
    }
  }
  WeightedEnsemble ensemble = WeightedEnsemble::uniform(std::move(init));

  BootstrapRun run;
  run.estimates.reserve(truth.steps());
  const auto start = std::chrono::steady_clock::now();
  for (std::size_t k = 0; k < truth.steps(); ++k) {
    bool resampled = false;
    ensemble = bootstrap_step(ensemble, model, truth.obs_increments[k], truth.dt, stream,
                              resample_threshold, k, &resampled);
    run.resamples += resampled ? 1 : 0;
    run.estimates.push_back(weighted_estimate(ensemble, model, truth.times[k + 1]));
  }
  run.loop_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return run;
}

}  // namespace fpf
