#include "fpf/harness/scenario.hpp"

#include "fpf/baselines.hpp"
#include "fpf/csv.hpp"
#include "fpf/errors.hpp"
#include "fpf/harness/metrics.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <stdexcept>

#ifndef FPF_VERSION
#define FPF_VERSION "unknown"
#endif

namespace fpf::harness {

namespace {

std::string trial_suffix(std::size_t trial) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%03zu", trial);
  return buf;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write '" + path.string() + "'");
  }
  return out;
}

GridSpec grid_for(const ScenarioConfig& config, const ScalarDiffusionModel& model) {
  GridSpec grid = default_grid(model, config.grid_cells);
  if (config.grid_lo) {
    grid.lo = *config.grid_lo;
    grid.hi = *config.grid_hi;
  }
  return grid;
}

FpfOptions fpf_options(const ScenarioConfig& config) {
  FpfOptions options;
  options.gain_method = config.resolved_gain_method();
  options.form = config.form;
  options.dns.bandwidth = config.bandwidth;
  return options;
}

std::vector<double> variances(std::span<const FilterEstimate> estimates) {
  std::vector<double> v;
  v.reserve(estimates.size());
  for (const auto& e : estimates) {
    v.push_back(e.variance);
  }
  return v;
}

std::vector<double> means(std::span<const FilterEstimate> estimates) {
  std::vector<double> v;
  v.reserve(estimates.size());
  for (const auto& e : estimates) {
    v.push_back(e.mean);
  }
  return v;
}

}  // namespace

std::string_view to_string(TrialStatus status) {
  switch (status) {
    case TrialStatus::ok:
      return "ok";
    case TrialStatus::collapse:
      return "collapse";
    case TrialStatus::divergence:
      return "divergence";
  }
  return "?";
}

TruthPath trial_truth(const ScenarioConfig& config, const ScalarDiffusionModel& model,
                      std::size_t trial) {
  const RandomStream stream = RandomStream(config.seed, streams::truth).substream(trial);
  return simulate_truth(model, config.dt, config.horizon, stream);
}

TrialOutput run_trial(const ScenarioConfig& config, std::size_t trial, const TruthPath* truth) {
  const ScalarDiffusionModel model = config.build_model();
  TrialOutput out;
  out.result.trial = trial;
  try {
    out.truth = truth ? *truth : trial_truth(config, model, trial);
    out.result.dz_hash = increments_hash(out.truth);
    const double steps = static_cast<double>(out.truth.steps());

    switch (config.filter) {
      case FilterKind::fpf: {
        const RandomStream stream = RandomStream(config.seed, streams::fpf).substream(trial);
        FpfRun run = run_fpf(model, fpf_options(config), out.truth, config.n_particles, stream);
        out.estimates = std::move(run.estimates);
        out.result.seconds_per_iteration = run.loop_seconds / steps;
        break;
      }
      case FilterKind::bootstrap: {
        const RandomStream stream = RandomStream(config.seed, streams::bootstrap).substream(trial);
        BootstrapRun run = run_bootstrap(model, out.truth, config.n_particles, stream,
                                         config.resample_threshold);
        out.estimates = std::move(run.estimates);
        out.result.seconds_per_iteration = run.loop_seconds / steps;
        break;
      }
      case FilterKind::kalman: {
        const LinearModelParams& lin = *model.linear_params();
        const auto start = std::chrono::steady_clock::now();
        const auto states = kalman_bucy_run(lin, out.truth);
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        for (const KalmanState& s : states) {
          out.estimates.push_back(FilterEstimate{s.mean, s.variance, lin.gamma * s.mean, s.time});
        }
        out.result.seconds_per_iteration = secs / steps;
        break;
      }
      case FilterKind::ks_oracle: {
        KsRun run = ks_filter_run(model, out.truth, grid_for(config, model), config.snapshot_times);
        for (const KsSummary& s : run.summaries) {
          out.estimates.push_back(FilterEstimate{s.mean, s.variance, s.h_hat, s.time});
        }
        out.snapshots = std::move(run.snapshots);
        out.result.seconds_per_iteration = run.loop_seconds / steps;
        break;
      }
    }

    const std::span<const double> states(out.truth.states.data() + 1, out.truth.steps());
    out.result.tracking_rmse = tracking_rmse(means(out.estimates), states, model.geometry());
    if (const auto& lin = model.linear_params()) {
      try {
        std::vector<double> reference;
        reference.reserve(out.truth.steps());
        for (const KalmanState& s : kalman_bucy_run(*lin, out.truth)) {
          reference.push_back(s.variance);
        }
        out.result.relative_mse = relative_mse(variances(out.estimates), reference, out.truth.dt);
      } catch (const DivergenceError&) {
        // No reference available at this dt.
      }
    }
  } catch (const FilterCollapseError& e) {
    out.result.status = TrialStatus::collapse;
    out.result.message = e.what();
  } catch (const DivergenceError& e) {
    out.result.status = TrialStatus::divergence;
    out.result.message = e.what();
  } catch (const GridTooSmallError& e) {
    out.result.status = TrialStatus::divergence;
    out.result.message = e.what();
  }
  if (out.result.status != TrialStatus::ok) {
    out.result.relative_mse.reset();
    out.result.tracking_rmse.reset();
  }
  return out;
}

RunReport run_scenario(const ScenarioConfig& config) {
  config.validate();
  if (config.output_dir.empty()) {
    throw ConfigError("no output directory configured");
  }
  std::filesystem::create_directories(config.output_dir);

  RunReport report;
  report.config_hash = config_hash(config);
  report.seed = config.seed;
  report.version = FPF_VERSION;

  double time_sum = 0.0;
  std::size_t timed = 0;
  for (std::size_t trial = 0; trial < config.trials; ++trial) {
    TrialOutput out = run_trial(config, trial);
    const std::string suffix = trial_suffix(trial);
    if (!out.truth.states.empty()) {
      auto f = open_output(config.output_dir / ("truth_" + suffix + ".csv"));
      write_truth_csv(out.truth, f);
    }
    if (out.result.status == TrialStatus::ok) {
      auto f = open_output(config.output_dir /
                           ("estimate_" + std::string(to_string(config.filter)) + "_" + suffix + ".csv"));
      write_estimates_csv(out.estimates, f);
      for (const auto& [t, density] : out.snapshots) {
        auto s = open_output(config.output_dir /
                             ("snapshot_" + suffix + "_" + format_double(t) + ".csv"));
        write_density_csv(density, s);
      }
      time_sum += out.result.seconds_per_iteration;
      ++timed;
    } else if (out.result.status == TrialStatus::collapse) {
      ++report.collapses;
    } else {
      ++report.divergences;
    }
    report.trials.push_back(std::move(out.result));
  }
  report.mean_iteration_seconds = timed ? time_sum / static_cast<double>(timed) : 0.0;

  auto f = open_output(config.output_dir / "report.txt");
  write_report(report, f);
  return report;
}

void write_report(const RunReport& report, std::ostream& out) {
  char hash[32];
  std::snprintf(hash, sizeof(hash), "%016llx", static_cast<unsigned long long>(report.config_hash));
  out << "config_hash = " << hash << '\n';
  out << "seed = " << report.seed << '\n';
  out << "version = " << report.version << '\n';
  out << "trials = " << report.trials.size() << '\n';
  out << "divergences = " << report.divergences << '\n';
  out << "collapses = " << report.collapses << '\n';
  out << "mean_iteration_seconds = " << format_double(report.mean_iteration_seconds) << '\n';
  for (const TrialResult& t : report.trials) {
    const std::string p = "trial." + std::to_string(t.trial) + ".";
    out << p << "status = " << to_string(t.status) << '\n';
    if (t.relative_mse) {
      out << p << "relative_mse = " << format_double(*t.relative_mse) << '\n';
    }
    if (t.tracking_rmse) {
      out << p << "tracking_rmse = " << format_double(*t.tracking_rmse) << '\n';
    }
    out << p << "seconds_per_iteration = " << format_double(t.seconds_per_iteration) << '\n';
    if (!t.message.empty()) {
      out << p << "message = " << t.message << '\n';
    }
  }
}

int exit_status(const RunReport& report) {
  if (report.divergences > 0) {
    return 4;
  }
  if (report.collapses > 0) {
    return 3;
  }
  return 0;
}

std::vector<ComparisonRow> compare_filters(std::span<const ScenarioConfig> configs) {
  if (configs.empty()) {
    throw ConfigError("compare: no configs");
  }
  const ScenarioConfig& first = configs.front();
  for (const ScenarioConfig& c : configs) {
    c.validate();
    if (c.model != first.model || c.dt != first.dt || c.horizon != first.horizon ||
        c.seed != first.seed || c.trials != first.trials) {
      throw ConfigError(
          "compare: configs must share model family, dt, horizon, seed and trials");
    }
  }

  // Cell key: model parameters. Each cell owns one truth path per trial.
  std::map<ParamMap, std::vector<TruthPath>> cells;
  for (const ScenarioConfig& c : configs) {
    auto [it, inserted] = cells.try_emplace(c.model_params);
    if (inserted) {
      const ScalarDiffusionModel model = c.build_model();
      for (std::size_t trial = 0; trial < c.trials; ++trial) {
        it->second.push_back(trial_truth(c, model, trial));
      }
    }
  }

  std::vector<ComparisonRow> rows;
  for (const ScenarioConfig& c : configs) {
    const auto& truths = cells.at(c.model_params);
    ComparisonRow row;
    row.filter = std::string(to_string(c.filter));
    if (c.filter == FilterKind::fpf) {
      row.filter += ":" + std::string(to_string(c.resolved_gain_method()));
    }
    row.n_particles = c.n_particles;
    if (auto it = c.model_params.find("alpha"); it != c.model_params.end()) {
      row.alpha = it->second;
    }
    row.dz_hash = increments_hash(truths.front());

    double mse_sum = 0.0;
    std::size_t mse_count = 0;
    double time_sum = 0.0;
    std::size_t time_count = 0;
    for (std::size_t trial = 0; trial < c.trials; ++trial) {
      const TrialOutput out = run_trial(c, trial, &truths[trial]);
      if (out.result.dz_hash != increments_hash(truths[trial])) {
        throw std::logic_error("compare: filter consumed a different observation path");
      }
      if (out.result.status != TrialStatus::ok) {
        ++row.failures;
        continue;
      }
      if (out.result.relative_mse) {
        mse_sum += *out.result.relative_mse;
        ++mse_count;
      }
      time_sum += out.result.seconds_per_iteration;
      ++time_count;
    }
    if (mse_count) {
      row.mse = mse_sum / static_cast<double>(mse_count);
    }
    row.time_per_iteration = time_count ? time_sum / static_cast<double>(time_count) : 0.0;
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_comparison_csv(std::span<const ComparisonRow> rows, std::ostream& out) {
  out << "filter,N,alpha,mse,time_per_iter,failures,dz_hash\n";
  for (const ComparisonRow& r : rows) {
    char hash[32];
    std::snprintf(hash, sizeof(hash), "%016llx", static_cast<unsigned long long>(r.dz_hash));
    out << r.filter << ',' << r.n_particles << ',' << (r.alpha ? format_double(*r.alpha) : "")
        << ',' << (r.mse ? format_double(*r.mse) : "") << ','
        << format_double(r.time_per_iteration) << ',' << r.failures << ',' << hash << '\n';
  }
}

GainDump gain_dump(const ScenarioConfig& config, double at) {
  config.validate();
  if (config.filter != FilterKind::fpf) {
    throw ConfigError("gaindump needs filter = fpf");
  }
  if (!(at >= 0.0) || at > config.horizon + 1e-12) {
    throw ConfigError("gaindump: --at must lie in [0, horizon]");
  }
  const ScalarDiffusionModel model = config.build_model();
  const TruthPath truth = trial_truth(config, model, 0);
  const auto target = static_cast<std::size_t>(std::llround(at / config.dt));
  const FpfOptions options = fpf_options(config);

  RandomStream stream = RandomStream(config.seed, streams::fpf).substream(0);
  ParticleEnsemble ensemble = initial_ensemble(model, config.n_particles, stream);
  for (std::size_t k = 0; k < std::min(target, truth.steps()); ++k) {
    ensemble = fpf_step(ensemble, model, options, truth.obs_increments[k], truth.dt, stream);
    ensemble.time = truth.times[k + 1];
  }
  GainDump dump;
  dump.time = ensemble.time;
  dump.gain = compute_gain(ensemble, model, options);
  dump.positions = std::move(ensemble.positions);
  return dump;
}

}  // namespace fpf::harness
