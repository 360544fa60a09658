#include "fpf/baselines.hpp"
#include "fpf/errors.hpp"
#include "fpf/filter.hpp"
#include "fpf/gain.hpp"
#include "fpf/harness/config.hpp"
#include "fpf/harness/metrics.hpp"
#include "fpf/harness/scenario.hpp"
#include "fpf/model.hpp"
#include "fpf/oracle.hpp"
#include "fpf/random.hpp"
#include "fpf/simulate.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <string>
#include <vector>

namespace py = pybind11;
using namespace fpf;

namespace {

using Array = py::array_t<double>;

Array to_array(const std::vector<double>& v) { return Array(static_cast<py::ssize_t>(v.size()), v.data()); }

std::vector<double> to_vector(const Array& a) {
  const auto flat = a.unchecked<1>();
  std::vector<double> v(static_cast<std::size_t>(flat.shape(0)));
  for (py::ssize_t i = 0; i < flat.shape(0); ++i) v[static_cast<std::size_t>(i)] = flat(i);
  return v;
}

py::dict gain_to_dict(const GainField& g) {
  std::vector<double> k(g.at_particles.size());
  std::vector<double> kp(g.at_particles.size());
  for (std::size_t i = 0; i < k.size(); ++i) {
    k[i] = g.at_particles[i].k;
    kp[i] = g.at_particles[i].k_prime;
  }
  py::dict d;
  d["K"] = to_array(k);
  d["Kprime"] = to_array(kp);
  d["method"] = std::string(to_string(g.method));
  d["clipped"] = g.clipped;
  d["floored"] = g.floored;
  d["bandwidth"] = g.bandwidth;
  return d;
}

py::dict estimates_to_dict(const std::vector<FilterEstimate>& est) {
  std::vector<double> t, mean, var, h;
  for (const auto& e : est) {
    t.push_back(e.time);
    mean.push_back(e.mean);
    var.push_back(e.variance);
    h.push_back(e.h_hat);
  }
  py::dict d;
  d["t"] = to_array(t);
  d["mean"] = to_array(mean);
  d["variance"] = to_array(var);
  d["h_hat"] = to_array(h);
  return d;
}

TruthPath truth_from(const py::dict& d) {
  TruthPath t;
  t.times = to_vector(d["t"].cast<Array>());
  t.states = to_vector(d["x"].cast<Array>());
  t.obs_increments = to_vector(d["dz"].cast<Array>());
  t.dt = d["dt"].cast<double>();
  return t;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Feedback particle filter engine";
  m.attr("__version__") = FPF_VERSION;

  py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_RuntimeError);
  py::register_exception<FilterCollapseError>(m, "FilterCollapseError", PyExc_RuntimeError);
  py::register_exception<GridTooSmallError>(m, "GridTooSmallError", PyExc_RuntimeError);
  py::register_exception<harness::ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<ScalarDiffusionModel>(m, "Model")
      .def_property_readonly("name", &ScalarDiffusionModel::name)
      .def_property_readonly("sigma_b", &ScalarDiffusionModel::sigma_b)
      .def_property_readonly("sigma_w", &ScalarDiffusionModel::sigma_w)
      .def_property_readonly("init_mean", &ScalarDiffusionModel::init_mean)
      .def_property_readonly("init_var", &ScalarDiffusionModel::init_var)
      .def_property_readonly("periodic",
                             [](const ScalarDiffusionModel& s) { return s.geometry() == Geometry::circle; })
      .def("drift", &ScalarDiffusionModel::drift)
      .def("obs", &ScalarDiffusionModel::obs)
      .def("obs_deriv", &ScalarDiffusionModel::obs_deriv);

  m.def(
      "make_model",
      [](const std::string& name, const ParamMap& params) { return make_builtin_model(name, params); },
      py::arg("name"), py::arg("params") = ParamMap{});

  m.def(
      "simulate_truth",
      [](const ScalarDiffusionModel& model, double dt, double horizon, std::uint64_t seed) {
        const TruthPath t = simulate_truth(model, dt, horizon, RandomStream(seed, streams::truth));
        py::dict d;
        d["t"] = to_array(t.times);
        d["x"] = to_array(t.states);
        d["dz"] = to_array(t.obs_increments);
        d["dt"] = t.dt;
        return d;
      },
      py::arg("model"), py::arg("dt"), py::arg("horizon"), py::arg("seed"));

  m.def(
      "dns_gain",
      [](const Array& positions, const ScalarDiffusionModel& model, std::optional<double> bandwidth) {
        DnsOptions options;
        options.bandwidth = bandwidth;
        return gain_to_dict(dns_gain(to_vector(positions), model, options));
      },
      py::arg("positions"), py::arg("model"), py::arg("bandwidth") = py::none());
  m.def("default_bandwidth",
        [](const Array& positions) { return default_bandwidth(to_vector(positions)); });
  m.def(
      "fourier_gain",
      [](const Array& angles, double sigma_w) {
        return gain_to_dict(fourier_gain_circle(to_vector(angles), sigma_w));
      },
      py::arg("angles"), py::arg("sigma_w"));
  m.def("kalman_gain", &kalman_gain_scalar, py::arg("variance"), py::arg("gamma"),
        py::arg("sigma_w"));

  m.def(
      "run_fpf",
      [](const ScalarDiffusionModel& model, const py::dict& truth, std::size_t n,
         const std::string& gain, std::uint64_t seed, const std::string& form,
         std::optional<double> bandwidth) {
        FpfOptions options;
        options.gain_method = gain_method_from_name(gain);
        options.form = fpf_form_from_name(form);
        options.dns.bandwidth = bandwidth;
        const FpfRun run = run_fpf(model, options, truth_from(truth), n, RandomStream(seed, streams::fpf));
        py::dict d = estimates_to_dict(run.estimates);
        d["loop_seconds"] = run.loop_seconds;
        d["clipped_gains"] = run.clipped_gains;
        return d;
      },
      py::arg("model"), py::arg("truth"), py::arg("n_particles"), py::arg("gain") = "exact_linear",
      py::arg("seed") = 1, py::arg("form") = "stratonovich_euler", py::arg("bandwidth") = py::none());

  m.def(
      "run_bootstrap",
      [](const ScalarDiffusionModel& model, const py::dict& truth, std::size_t n, std::uint64_t seed,
         double threshold) {
        const BootstrapRun run =
            run_bootstrap(model, truth_from(truth), n, RandomStream(seed, streams::bootstrap), threshold);
        py::dict d = estimates_to_dict(run.estimates);
        d["loop_seconds"] = run.loop_seconds;
        d["resamples"] = run.resamples;
        return d;
      },
      py::arg("model"), py::arg("truth"), py::arg("n_particles"), py::arg("seed") = 1,
      py::arg("resample_threshold") = 0.5);

  m.def(
      "kalman_bucy",
      [](const ParamMap& params, const py::dict& truth) {
        const auto model = make_builtin_model(BuiltinModel::linear, params);
        const auto states = kalman_bucy_run(*model.linear_params(), truth_from(truth));
        std::vector<double> t, mean, var;
        for (const auto& s : states) {
          t.push_back(s.time);
          mean.push_back(s.mean);
          var.push_back(s.variance);
        }
        py::dict d;
        d["t"] = to_array(t);
        d["mean"] = to_array(mean);
        d["variance"] = to_array(var);
        return d;
      },
      py::arg("params"), py::arg("truth"));

  m.def(
      "ks_filter",
      [](const ScalarDiffusionModel& model, const py::dict& truth, std::size_t cells) {
        const KsRun run = ks_filter_run(model, truth_from(truth), default_grid(model, cells));
        std::vector<double> t, mean, var, h;
        for (const auto& s : run.summaries) {
          t.push_back(s.time);
          mean.push_back(s.mean);
          var.push_back(s.variance);
          h.push_back(s.h_hat);
        }
        py::dict d;
        d["t"] = to_array(t);
        d["mean"] = to_array(mean);
        d["variance"] = to_array(var);
        d["h_hat"] = to_array(h);
        return d;
      },
      py::arg("model"), py::arg("truth"), py::arg("cells") = 800);

  m.def(
      "quadrature_gain",
      [](const ScalarDiffusionModel& model, double lo, double hi, std::size_t cells,
         const py::function& density) {
        GridDensity g = GridDensity::from_function(
            lo, hi, cells, [&density](double x) { return density(x).cast<double>(); });
        py::dict d;
        std::vector<double> x(g.nodes());
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = g.x(i);
        d["x"] = to_array(x);
        d["K"] = to_array(quadrature_gain(g, model));
        return d;
      },
      py::arg("model"), py::arg("lo"), py::arg("hi"), py::arg("cells"), py::arg("density"));

  m.def(
      "relative_mse",
      [](const Array& est, const Array& ref, double dt) {
        return harness::relative_mse(to_vector(est), to_vector(ref), dt);
      },
      py::arg("estimated"), py::arg("reference"), py::arg("dt"));

  m.def(
      "run_scenario",
      [](const std::string& text, const std::optional<std::filesystem::path>& output_dir) {
        auto config = harness::parse_config(text);
        if (output_dir) config.output_dir = *output_dir;
        const auto report = harness::run_scenario(config);
        py::dict d;
        d["config_hash"] = report.config_hash;
        d["divergences"] = report.divergences;
        d["collapses"] = report.collapses;
        d["mean_iteration_seconds"] = report.mean_iteration_seconds;
        d["exit_status"] = harness::exit_status(report);
        py::list trials;
        for (const auto& t : report.trials) {
          py::dict row;
          row["trial"] = t.trial;
          row["status"] = std::string(harness::to_string(t.status));
          row["relative_mse"] = t.relative_mse;
          row["tracking_rmse"] = t.tracking_rmse;
          row["dz_hash"] = t.dz_hash;
          trials.append(row);
        }
        d["trials"] = trials;
        return d;
      },
      py::arg("config"), py::arg("output_dir") = py::none());
}
