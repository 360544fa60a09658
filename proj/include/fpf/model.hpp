#pragma once

#include <Eigen/Dense>

#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>

namespace fpf {

class RandomStream;

inline constexpr double two_pi = 2.0 * std::numbers::pi;

enum class Geometry { line, circle };

/// Maps an angle onto [0, 2π).
double wrap_angle(double theta);

/// Law of X₀. `gaussian` is N(mean, variance); `bimodal` is the equal-weight
/// mixture of N(mean ∓ separation, variance); `uniform_circle` is uniform on
/// [0, 2π) and ignores the other fields.
struct InitialLaw {
  enum class Kind { gaussian, bimodal, uniform_circle };

  Kind kind = Kind::gaussian;
  double mean = 0.0;
  double variance = 1.0;
  double separation = 0.0;

  static InitialLaw gaussian(double mean, double variance);
  static InitialLaw bimodal(double mean, double separation, double variance);
  static InitialLaw uniform_circle();

  double sample(RandomStream& stream) const;
  /// Probability density at x. Degenerate (zero variance) laws have no density.
  double density(double x) const;
  double overall_mean() const;
  double overall_variance() const;
};

struct LinearModelParams {
  double alpha = -0.5;
  double gamma = 3.0;
  double sigma_b = 1.0;
  double sigma_w = 0.5;
  double init_mean = 1.0;
  double init_var = 1.0;

  /// Throws std::invalid_argument on non-finite fields, σ_W ≤ 0, or negative variances.
  void validate() const;
};

/// d-dimensional linear-Gaussian model dX = A X dt + σ_B dB, dZ = γᵀX dt + σ_W dW.
struct MultiLinearModelParams {
  Eigen::MatrixXd a_matrix;
  Eigen::VectorXd gamma;
  double sigma_b = 1.0;
  double sigma_w = 1.0;
  Eigen::VectorXd init_mean;
  Eigen::MatrixXd init_cov;

  Eigen::Index dim() const { return gamma.size(); }
  void validate() const;
};

/// Scalar signal/observation model
///
///   dX = a(X) dt + σ_B dB,    dZ = h(X) dt + σ_W dW.
///
/// h′ is supplied analytically. Circle models carry 2π-periodic a and h and
/// have their states wrapped to [0, 2π). Immutable after construction.
class ScalarDiffusionModel {
public:
  using Function = std::function<double(double)>;

  ScalarDiffusionModel(std::string name, Function drift, Function obs, Function obs_deriv,
                       double sigma_b, double sigma_w, InitialLaw init,
                       Geometry geometry = Geometry::line);

  /// Linear model x ↦ αx, x ↦ γx.
  static ScalarDiffusionModel linear(const LinearModelParams& params);

  const std::string& name() const noexcept { return name_; }
  double drift(double x) const { return drift_(x); }
  double obs(double x) const { return obs_(x); }
  double obs_deriv(double x) const { return obs_deriv_(x); }
  double sigma_b() const noexcept { return sigma_b_; }
  double sigma_w() const noexcept { return sigma_w_; }
  const InitialLaw& initial_law() const noexcept { return init_; }
  double init_mean() const { return init_.overall_mean(); }
  double init_var() const { return init_.overall_variance(); }
  Geometry geometry() const noexcept { return geometry_; }

  /// Present only for models built from LinearModelParams.
  const std::optional<LinearModelParams>& linear_params() const noexcept { return linear_; }

private:
  std::string name_;
  Function drift_;
  Function obs_;
  Function obs_deriv_;
  double sigma_b_;
  double sigma_w_;
  InitialLaw init_;
  Geometry geometry_;
  std::optional<LinearModelParams> linear_;
};

enum class BuiltinModel { linear, double_well, oscillator };

using ParamMap = std::map<std::string, double, std::less<>>;

BuiltinModel builtin_model_from_name(std::string_view name);
std::string_view to_string(BuiltinModel model);

/// Builds one of the three experiment models.
///
/// linear:      alpha, gamma, sigma_b, sigma_w required; init_mean, init_var
///              default to 1 and 1.
/// double_well: sigma_b, sigma_w required; prior is two Gaussian clusters
///              at init_mean ± init_separation (defaults 0, 0.5) with variance
///              init_var (default 0.25).
/// oscillator:  omega, sigma_b, sigma_w required; prior uniform on the circle.
///
/// Throws std::invalid_argument for missing, unknown, or non-finite
/// parameters and for σ_W ≤ 0.
ScalarDiffusionModel make_builtin_model(BuiltinModel model, const ParamMap& params);
ScalarDiffusionModel make_builtin_model(std::string_view name, const ParamMap& params);

}  // namespace fpf
