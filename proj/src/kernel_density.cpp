#include "fpf/kernel_density.hpp"

#include "fpf/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fpf {

namespace {

constexpr double kCutoffSigmas = 9.0;
constexpr double kBinsPerSigma = 32.0;
// Lattices wider than this many nodes per particle fall back to the exact cutoff sum.
constexpr double kMaxNodesPerParticle = 64.0;

MixtureValues exact_sums(std::span<const double> x, double variance) {
  const std::size_t n = x.size();
  const double inv_two_var = 0.5 / variance;
  const double cutoff = kCutoffSigmas * std::sqrt(variance);

  std::vector<double> p(n, 1.0);  // self term
  std::vector<double> dp(n, 0.0);
  std::size_t hi = 0;
  for (std::size_t i = 0; i < n; ++i) {
    hi = std::max(hi, i + 1);
    while (hi < n && x[hi] - x[i] <= cutoff) {
      ++hi;
    }
    const double xi = x[i];
    double acc_p = 0.0;
    double acc_dp = 0.0;
    for (std::size_t j = i + 1; j < hi; ++j) {
      const double d = x[j] - xi;
      const double e = std::exp(-d * d * inv_two_var);
      acc_p += e;
      acc_dp += d * e;
      p[j] += e;
      dp[j] -= d * e;
    }
    p[i] += acc_p;
    dp[i] += acc_dp;
  }

  const double norm = 1.0 / (static_cast<double>(n) * std::sqrt(two_pi * variance));
  for (std::size_t i = 0; i < n; ++i) {
    p[i] *= norm;
    dp[i] *= norm / variance;
  }
  return {std::move(p), std::move(dp)};
}

MixtureValues binned_sums(std::span<const double> x, double variance) {
  const std::size_t n = x.size();
  const double sigma = std::sqrt(variance);
  const double delta = sigma / kBinsPerSigma;
  const double lo = x.front();
  const double span = x.back() - lo;
  const auto nodes = static_cast<std::size_t>(std::ceil(span / delta)) + 2;

  std::vector<double> counts(nodes, 0.0);
  std::vector<std::size_t> cell(n);
  std::vector<double> frac(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = (x[i] - lo) / delta;
    auto m = static_cast<std::size_t>(u);
    m = std::min(m, nodes - 2);
    const double f = u - static_cast<double>(m);
    cell[i] = m;
    frac[i] = f;
    counts[m] += 1.0 - f;
    counts[m + 1] += f;
  }

  const auto half = static_cast<std::ptrdiff_t>(std::ceil(kCutoffSigmas * kBinsPerSigma));
  std::vector<double> kern(static_cast<std::size_t>(2 * half + 1));
  std::vector<double> dkern(kern.size());
  for (std::ptrdiff_t l = -half; l <= half; ++l) {
    const double off = static_cast<double>(l) * delta;
    const double e = std::exp(-0.5 * off * off / variance);
    kern[static_cast<std::size_t>(l + half)] = e;
    // d/dx of the kernel centred at x - off, evaluated at x.
    dkern[static_cast<std::size_t>(l + half)] = -off / variance * e;
  }

  std::vector<double> grid_p(nodes, 0.0);
  std::vector<double> grid_dp(nodes, 0.0);
  const auto m_count = static_cast<std::ptrdiff_t>(nodes);
  for (std::ptrdiff_t m = 0; m < m_count; ++m) {
    const std::ptrdiff_t l_lo = std::max(-half, m - (m_count - 1));
    const std::ptrdiff_t l_hi = std::min(half, m);
    double acc_p = 0.0;
    double acc_dp = 0.0;
    for (std::ptrdiff_t l = l_lo; l <= l_hi; ++l) {
      const double c = counts[static_cast<std::size_t>(m - l)];
      acc_p += c * kern[static_cast<std::size_t>(l + half)];
      acc_dp += c * dkern[static_cast<std::size_t>(l + half)];
    }
    grid_p[static_cast<std::size_t>(m)] = acc_p;
    grid_dp[static_cast<std::size_t>(m)] = acc_dp;
  }

  const double norm = 1.0 / (static_cast<double>(n) * std::sqrt(two_pi * variance));
  MixtureValues out{std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t m = cell[i];
    const double f = frac[i];
    out.density[i] = norm * ((1.0 - f) * grid_p[m] + f * grid_p[m + 1]);
    out.derivative[i] = norm * ((1.0 - f) * grid_dp[m] + f * grid_dp[m + 1]);
  }
  return out;
}

}  // namespace

MixtureValues gaussian_mixture_at_points(std::span<const double> sorted, double variance,
                                         DensityEvaluation method) {
  if (sorted.empty()) {
    return {};
  }
  if (!(variance > 0.0) || !std::isfinite(variance)) {
    throw std::invalid_argument("kernel variance must be positive");
  }
  if (method == DensityEvaluation::automatic) {
    method = sorted.size() <= exact_density_limit ? DensityEvaluation::exact
                                                  : DensityEvaluation::binned;
  }
  const double nodes = (sorted.back() - sorted.front()) / std::sqrt(variance) * kBinsPerSigma;
  if (method == DensityEvaluation::binned && nodes > 0.0 &&
      nodes <= kMaxNodesPerParticle * static_cast<double>(sorted.size())) {
    return binned_sums(sorted, variance);
  }
  return exact_sums(sorted, variance);
}

}  // namespace fpf
