#include "fpf/model.hpp"

#include "fpf/random.hpp"

#include <cmath>
#include <set>
#include <stdexcept>
#include <utility>

namespace fpf {

double wrap_angle(double theta) {
  double r = std::fmod(theta, two_pi);
  if (r < 0.0) {
    r += two_pi;
  }
  // fmod of a tiny negative value can round up to exactly 2π.
  if (r >= two_pi) {
    r = 0.0;
  }
  return r;
}

InitialLaw InitialLaw::gaussian(double mean, double variance) {
  return InitialLaw{Kind::gaussian, mean, variance, 0.0};
}

InitialLaw InitialLaw::bimodal(double mean, double separation, double variance) {
  return InitialLaw{Kind::bimodal, mean, variance, separation};
}

InitialLaw InitialLaw::uniform_circle() { return InitialLaw{Kind::uniform_circle, 0.0, 0.0, 0.0}; }

double InitialLaw::sample(RandomStream& stream) const {
  switch (kind) {
    case Kind::gaussian:
      return mean + std::sqrt(variance) * stream.normal();
    case Kind::bimodal: {
      const double centre = stream.uniform() < 0.5 ? mean - separation : mean + separation;
      return centre + std::sqrt(variance) * stream.normal();
    }
    case Kind::uniform_circle:
      return wrap_angle(two_pi * stream.uniform());
  }
  throw std::logic_error("unhandled initial law");
}

double InitialLaw::density(double x) const {
  const auto normal_pdf = [this](double z, double centre) {
    const double d = z - centre;
    return std::exp(-0.5 * d * d / variance) / std::sqrt(two_pi * variance);
  };
  switch (kind) {
    case Kind::gaussian:
      return normal_pdf(x, mean);
    case Kind::bimodal:
      return 0.5 * (normal_pdf(x, mean - separation) + normal_pdf(x, mean + separation));
    case Kind::uniform_circle:
      return 1.0 / two_pi;
  }
  throw std::logic_error("unhandled initial law");
}

double InitialLaw::overall_mean() const {
  return kind == Kind::uniform_circle ? std::numbers::pi : mean;
}

double InitialLaw::overall_variance() const {
  switch (kind) {
    case Kind::gaussian:
      return variance;
    case Kind::bimodal:
      return variance + separation * separation;
    case Kind::uniform_circle:
      return two_pi * two_pi / 12.0;
  }
  throw std::logic_error("unhandled initial law");
}

void LinearModelParams::validate() const {
  for (double v : {alpha, gamma, sigma_b, sigma_w, init_mean, init_var}) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("linear model: parameters must be finite");
    }
  }
  if (sigma_w <= 0.0) {
    throw std::invalid_argument("linear model: sigma_w must be positive");
  }
  if (sigma_b < 0.0 || init_var < 0.0) {
    throw std::invalid_argument("linear model: sigma_b and init_var must be nonnegative");
  }
}

void MultiLinearModelParams::validate() const {
  const Eigen::Index d = dim();
  if (d < 1) {
    throw std::invalid_argument("multivariable model: dimension must be positive");
  }
  if (a_matrix.rows() != d || a_matrix.cols() != d || init_mean.size() != d ||
      init_cov.rows() != d || init_cov.cols() != d) {
    throw std::invalid_argument("multivariable model: dimension mismatch");
  }
  if (!(sigma_w > 0.0) || !std::isfinite(sigma_w) || !(sigma_b >= 0.0)) {
    throw std::invalid_argument("multivariable model: invalid noise intensities");
  }
  if ((init_cov - init_cov.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw std::invalid_argument("multivariable model: init_cov is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(init_cov);
  if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() <= 0.0) {
    throw std::invalid_argument("multivariable model: init_cov is not positive definite");
  }
}

ScalarDiffusionModel::ScalarDiffusionModel(std::string name, Function drift, Function obs,
                                           Function obs_deriv, double sigma_b, double sigma_w,
                                           InitialLaw init, Geometry geometry)
    : name_(std::move(name)),
      drift_(std::move(drift)),
      obs_(std::move(obs)),
      obs_deriv_(std::move(obs_deriv)),
      sigma_b_(sigma_b),
      sigma_w_(sigma_w),
      init_(init),
      geometry_(geometry) {
  if (!drift_ || !obs_ || !obs_deriv_) {
    throw std::invalid_argument("model functions must be set");
  }
  if (!std::isfinite(sigma_w_) || sigma_w_ <= 0.0) {
    throw std::invalid_argument("sigma_w must be positive and finite");
  }
  if (!std::isfinite(sigma_b_) || sigma_b_ < 0.0) {
    throw std::invalid_argument("sigma_b must be nonnegative and finite");
  }
  if (init_.kind != InitialLaw::Kind::uniform_circle &&
      (!std::isfinite(init_.mean) || !std::isfinite(init_.variance) || init_.variance < 0.0 ||
       !std::isfinite(init_.separation))) {
    throw std::invalid_argument("initial law must have finite mean and nonnegative variance");
  }
}

ScalarDiffusionModel ScalarDiffusionModel::linear(const LinearModelParams& p) {
  p.validate();
  const double alpha = p.alpha;
  const double gamma = p.gamma;
  ScalarDiffusionModel model(
      "linear", [alpha](double x) { return alpha * x; }, [gamma](double x) { return gamma * x; },
      [gamma](double) { return gamma; }, p.sigma_b, p.sigma_w,
      InitialLaw::gaussian(p.init_mean, p.init_var));
  model.linear_ = p;
  return model;
}

BuiltinModel builtin_model_from_name(std::string_view name) {
  if (name == "linear") return BuiltinModel::linear;
  if (name == "double_well") return BuiltinModel::double_well;
  if (name == "oscillator") return BuiltinModel::oscillator;
  throw std::invalid_argument("unknown model '" + std::string(name) + "'");
}

std::string_view to_string(BuiltinModel model) {
  switch (model) {
    case BuiltinModel::linear:
      return "linear";
    case BuiltinModel::double_well:
      return "double_well";
    case BuiltinModel::oscillator:
      return "oscillator";
  }
  return "?";
}

namespace {

class ParamReader {
public:
  ParamReader(std::string_view model, const ParamMap& params) : model_(model), params_(params) {}

  double required(std::string_view key) {
    used_.insert(std::string(key));
    auto it = params_.find(key);
    if (it == params_.end()) {
      throw std::invalid_argument(model_ + ": missing parameter '" + std::string(key) + "'");
    }
    return checked(key, it->second);
  }

  double optional(std::string_view key, double fallback) {
    used_.insert(std::string(key));
    auto it = params_.find(key);
    return it == params_.end() ? fallback : checked(key, it->second);
  }

  void reject_unknown() const {
    for (const auto& [key, value] : params_) {
      if (!used_.contains(key)) {
        throw std::invalid_argument(model_ + ": unknown parameter '" + key + "'");
      }
    }
  }

private:
  double checked(std::string_view key, double v) const {
    if (!std::isfinite(v)) {
      throw std::invalid_argument(model_ + ": parameter '" + std::string(key) + "' is not finite");
    }
    return v;
  }

  std::string model_;
  const ParamMap& params_;
  std::set<std::string, std::less<>> used_;
};

void require_positive_sigma_w(double sigma_w) {
  if (sigma_w <= 0.0) {
    throw std::invalid_argument("sigma_w must be positive");
  }
}

}  // namespace

ScalarDiffusionModel make_builtin_model(BuiltinModel model, const ParamMap& params) {
  ParamReader reader(to_string(model), params);
  switch (model) {
    case BuiltinModel::linear: {
      LinearModelParams p;
      p.alpha = reader.required("alpha");
      p.gamma = reader.required("gamma");
      p.sigma_b = reader.required("sigma_b");
      p.sigma_w = reader.required("sigma_w");
      p.init_mean = reader.optional("init_mean", 1.0);
      p.init_var = reader.optional("init_var", 1.0);
      reader.reject_unknown();
      require_positive_sigma_w(p.sigma_w);
      return ScalarDiffusionModel::linear(p);
    }
    case BuiltinModel::double_well: {
      const double sigma_b = reader.required("sigma_b");
      const double sigma_w = reader.required("sigma_w");
      const double mean = reader.optional("init_mean", 0.0);
      const double separation = reader.optional("init_separation", 0.5);
      const double var = reader.optional("init_var", 0.25);
      reader.reject_unknown();
      require_positive_sigma_w(sigma_w);
      return ScalarDiffusionModel(
          "double_well", [](double x) { return x * (1.0 - x * x); }, [](double x) { return x; },
          [](double) { return 1.0; }, sigma_b, sigma_w,
          InitialLaw::bimodal(mean, separation, var));
    }
    case BuiltinModel::oscillator: {
      const double omega = reader.required("omega");
      const double sigma_b = reader.required("sigma_b");
      const double sigma_w = reader.required("sigma_w");
      reader.reject_unknown();
      require_positive_sigma_w(sigma_w);
      return ScalarDiffusionModel(
          "oscillator", [omega](double) { return omega; },
          [](double theta) { return 0.5 * (1.0 + std::cos(theta)); },
          [](double theta) { return -0.5 * std::sin(theta); }, sigma_b, sigma_w,
          InitialLaw::uniform_circle(), Geometry::circle);
    }
  }
  throw std::invalid_argument("unknown builtin model");
}

ScalarDiffusionModel make_builtin_model(std::string_view name, const ParamMap& params) {
  return make_builtin_model(builtin_model_from_name(name), params);
}

}  // namespace fpf
