#include "fpf/simulate.hpp"

#include "fpf/csv.hpp"
#include "fpf/errors.hpp"

#include <bit>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

namespace fpf {

std::size_t step_count(double dt, double horizon) {
  if (!std::isfinite(dt) || dt <= 0.0) {
    throw std::invalid_argument("dt must be positive");
  }
  if (!std::isfinite(horizon) || horizon < dt) {
    throw std::invalid_argument("horizon must be at least dt");
  }
  const double ratio = horizon / dt;
  const double n = std::round(ratio);
  if (std::abs(n * dt - horizon) > 1e-9 * horizon) {
    throw std::invalid_argument("dt must divide horizon");
  }
  return static_cast<std::size_t>(n);
}

TruthPath simulate_truth(const ScalarDiffusionModel& model, double dt, double horizon,
                         RandomStream stream) {
  const std::size_t n = step_count(dt, horizon);
  const bool circle = model.geometry() == Geometry::circle;
  const double sqrt_dt = std::sqrt(dt);
  const double obs_scale = model.sigma_w() * sqrt_dt;

  TruthPath path;
  path.dt = dt;
  path.times.resize(n + 1);
  path.states.resize(n + 1);
  path.obs_increments.resize(n);

  double x = model.initial_law().sample(stream);
  if (circle) {
    x = wrap_angle(x);
  }
  path.times[0] = 0.0;
  path.states[0] = x;
  for (std::size_t k = 0; k < n; ++k) {
    const double xi = stream.normal();
    const double eta = stream.normal();
    path.obs_increments[k] = model.obs(x) * dt + obs_scale * eta;
    x = euler_maruyama_step(model, x, dt, sqrt_dt, xi);
    if (!std::isfinite(x) || !std::isfinite(path.obs_increments[k])) {
      throw DivergenceError(k, std::nullopt,
                            "truth simulation diverged at step " + std::to_string(k));
    }
    if (circle) {
      x = wrap_angle(x);
    }
    path.times[k + 1] = static_cast<double>(k + 1) * dt;
    path.states[k + 1] = x;
  }
  return path;
}

void write_truth_csv(const TruthPath& truth, std::ostream& out) {
  out << "t,x,dz\n";
  for (std::size_t k = 0; k < truth.states.size(); ++k) {
    out << format_double(truth.times[k]) << ',' << format_double(truth.states[k]) << ',';
    if (k < truth.obs_increments.size()) {
      out << format_double(truth.obs_increments[k]);
    }
    out << '\n';
  }
}

std::uint64_t increments_hash(const TruthPath& truth) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double v : truth.obs_increments) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xffULL;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

}  // namespace fpf
