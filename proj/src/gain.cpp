#include "fpf/gain.hpp"

#include "fpf/csv.hpp"
#include "fpf/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

namespace fpf {

double sample_mean(std::span<const double> values) {
  if (values.empty()) {
    return 0.0;
  }
  double sum = 0.0;
  for (double v : values) {
    sum += v;
  }
  return sum / static_cast<double>(values.size());
}

double sample_variance(std::span<const double> values) {
  if (values.size() < 2) {
    return 0.0;
  }
  const double mean = sample_mean(values);
  double ss = 0.0;
  for (double v : values) {
    const double d = v - mean;
    ss += d * d;
  }
  return ss / static_cast<double>(values.size() - 1);
}

GainMethod gain_method_from_name(std::string_view name) {
  if (name == "exact_linear") return GainMethod::exact_linear;
  if (name == "dns") return GainMethod::dns;
  if (name == "fourier_circle") return GainMethod::fourier_circle;
  throw std::invalid_argument("unknown gain method '" + std::string(name) + "'");
}

std::string_view to_string(GainMethod method) {
  switch (method) {
    case GainMethod::exact_linear:
      return "exact_linear";
    case GainMethod::dns:
      return "dns";
    case GainMethod::fourier_circle:
      return "fourier_circle";
  }
  return "?";
}

double kalman_gain_scalar(double variance, double gamma, double sigma_w) {
  if (!(sigma_w > 0.0)) {
    throw std::invalid_argument("sigma_w must be positive");
  }
  return variance * gamma / (sigma_w * sigma_w);
}

Eigen::VectorXd kalman_gain_vector(const Eigen::MatrixXd& cov, const Eigen::VectorXd& gamma,
                                   double sigma_w) {
  if (cov.rows() != cov.cols() || cov.rows() != gamma.size()) {
    throw std::invalid_argument("kalman_gain_vector: dimension mismatch");
  }
  if (!(sigma_w > 0.0)) {
    throw std::invalid_argument("sigma_w must be positive");
  }
  if (cov.size() > 0 && (cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw std::invalid_argument("kalman_gain_vector: covariance is not symmetric");
  }
  return cov * gamma / (sigma_w * sigma_w);
}

double check_gradient_condition(const Eigen::MatrixXd& cov, const Eigen::VectorXd& gamma,
                                double sigma_w) {
  const Eigen::VectorXd gain = kalman_gain_vector(cov, gamma, sigma_w);
  const Eigen::Index d = gain.size();
  if (d < 1) {
    throw std::invalid_argument("check_gradient_condition: empty dimension");
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(cov);
  if (!lu.isInvertible()) {
    throw std::invalid_argument("check_gradient_condition: covariance is singular");
  }
  const Eigen::MatrixXd precision = lu.inverse();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      for (Eigen::Index k = 0; k < d; ++k) {
        worst = std::max(worst, std::abs(gain(i) * precision(j, k) - gain(j) * precision(i, k)));
      }
    }
  }
  return worst;
}

double default_bandwidth(std::span<const double> positions) {
  const double n = static_cast<double>(positions.size());
  const double sd = std::sqrt(sample_variance(positions));
  return std::max(1e-4, sd * std::pow(n, -0.4));
}

GainField dns_gain(std::span<const double> positions, const ScalarDiffusionModel& model,
                   const DnsOptions& options) {
  const std::size_t n = positions.size();
  if (n < 2) {
    throw std::invalid_argument("dns_gain: need at least two particles");
  }
  for (double x : positions) {
    if (!std::isfinite(x)) {
      throw std::invalid_argument("dns_gain: non-finite particle position");
    }
  }
  const double eps = options.bandwidth.value_or(default_bandwidth(positions));
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    throw std::invalid_argument("dns_gain: bandwidth must be positive");
  }

  std::vector<double> h(n);
  double h_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    h[i] = model.obs(positions[i]);
    h_sum += h[i];
  }
  const double h_hat = h_sum / static_cast<double>(n);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return positions[a] < positions[b] || (positions[a] == positions[b] && a < b);
  });

  std::vector<double> sorted(n);
  for (std::size_t r = 0; r < n; ++r) {
    sorted[r] = positions[order[r]];
  }
  const MixtureValues mix = gaussian_mixture_at_points(sorted, eps, options.density);
  const double p_max = *std::max_element(mix.density.begin(), mix.density.end());
  const double floor = options.density_floor * p_max;

  const double inv_var_w = 1.0 / (model.sigma_w() * model.sigma_w());
  const double inv_n = 1.0 / static_cast<double>(n);

  GainField field;
  field.method = GainMethod::dns;
  field.bandwidth = eps;
  field.at_particles.resize(n);

  // prefix = Σ (ĥ − h) over particles strictly to the left of the current tie group.
  double prefix = 0.0;
  std::size_t group_start = 0;
  while (group_start < n) {
    std::size_t group_end = group_start + 1;
    while (group_end < n && sorted[group_end] == sorted[group_start]) {
      ++group_end;
    }
    double group_sum = 0.0;
    for (std::size_t r = group_start; r < group_end; ++r) {
      const std::size_t i = order[r];
      const double residual = h_hat - h[i];
      group_sum += residual;

      double p = mix.density[r];
      if (p < floor) {
        p = floor;
        ++field.floored;
      }
      double k = (prefix + 0.5 * residual) * inv_n * inv_var_w / p;
      if (std::abs(k) > options.gain_cap) {
        k = std::copysign(options.gain_cap, k);
        ++field.clipped;
      }
      const double b = mix.derivative[r] / p;
      field.at_particles[i] = GainSample{k, residual * inv_var_w - b * k};
    }
    prefix += group_sum;
    group_start = group_end;
  }
  return field;
}

GainField dns_gain(std::span<const double> positions, const ScalarDiffusionModel& model,
                   double bandwidth) {
  DnsOptions options;
  options.bandwidth = bandwidth;
  return dns_gain(positions, model, options);
}

FourierGainCoeffs fourier_coefficients(std::span<const double> angles) {
  if (angles.empty()) {
    throw std::invalid_argument("fourier_coefficients: empty ensemble");
  }
  double c = 0.0;
  double s = 0.0;
  for (double theta : angles) {
    if (!std::isfinite(theta)) {
      throw std::invalid_argument("fourier_coefficients: non-finite angle");
    }
    c += std::cos(theta);
    s += std::sin(theta);
  }
  const double scale = 1.0 / (std::numbers::pi * static_cast<double>(angles.size()));
  return {c * scale, s * scale};
}

GainSample fourier_gain_at(double theta, const FourierGainCoeffs& coeffs, double sigma_w) {
  const double var_w = sigma_w * sigma_w;
  const double k0 = -std::sin(theta) / (2.0 * var_w);
  const double k0_prime = -std::cos(theta) / (2.0 * var_w);
  const double c1 = std::numbers::pi / (4.0 * var_w);
  const double s2 = std::sin(2.0 * theta);
  const double c2 = std::cos(2.0 * theta);
  const double k1 = c1 * (coeffs.p_c * s2 - coeffs.p_s * c2);
  const double k1_prime = 2.0 * c1 * (coeffs.p_c * c2 + coeffs.p_s * s2);
  return {k0 + k1, k0_prime + k1_prime};
}

GainField fourier_gain_circle(std::span<const double> angles, double sigma_w) {
  if (!(sigma_w > 0.0)) {
    throw std::invalid_argument("sigma_w must be positive");
  }
  const FourierGainCoeffs coeffs = fourier_coefficients(angles);
  GainField field;
  field.method = GainMethod::fourier_circle;
  field.at_particles.reserve(angles.size());
  for (double theta : angles) {
    field.at_particles.push_back(fourier_gain_at(theta, coeffs, sigma_w));
  }
  return field;
}

GainField exact_linear_gain(std::span<const double> positions, const LinearModelParams& params) {
  const double k = kalman_gain_scalar(sample_variance(positions), params.gamma, params.sigma_w);
  GainField field;
  field.method = GainMethod::exact_linear;
  field.at_particles.assign(positions.size(), GainSample{k, 0.0});
  return field;
}

void write_gain_csv(std::span<const double> positions, const GainField& gain, std::ostream& out) {
  if (positions.size() != gain.at_particles.size()) {
    throw std::invalid_argument("write_gain_csv: size mismatch");
  }
  out << "particle,x,K,Kprime\n";
  for (std::size_t i = 0; i < positions.size(); ++i) {
    out << i << ',' << format_double(positions[i]) << ',' << format_double(gain.at_particles[i].k)
        << ',' << format_double(gain.at_particles[i].k_prime) << '\n';
  }
}

}  // namespace fpf
