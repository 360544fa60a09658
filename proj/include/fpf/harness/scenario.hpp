#pragma once

#include "fpf/filter.hpp"
#include "fpf/gain.hpp"
#include "fpf/harness/config.hpp"
#include "fpf/oracle.hpp"
#include "fpf/simulate.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace fpf::harness {

enum class TrialStatus { ok, collapse, divergence };

std::string_view to_string(TrialStatus status);

struct TrialResult {
  std::size_t trial = 0;
  TrialStatus status = TrialStatus::ok;
  /// Against the Kalman-Bucy variance; linear models only.
  std::optional<double> relative_mse;
  std::optional<double> tracking_rmse;
  double seconds_per_iteration = 0.0;
  std::uint64_t dz_hash = 0;
  std::string message;
};

struct TrialOutput {
  TrialResult result;
  TruthPath truth;
  std::vector<FilterEstimate> estimates;
  std::vector<std::pair<double, GridDensity>> snapshots;
};

struct RunReport {
  std::vector<TrialResult> trials;
  double mean_iteration_seconds = 0.0;
  std::size_t divergences = 0;
  std::size_t collapses = 0;
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  std::string version;
};

/// Truth path for one trial, drawn from the (seed, truth, trial) substream.
TruthPath trial_truth(const ScenarioConfig& config, const ScalarDiffusionModel& model,
                      std::size_t trial);

/// Runs the configured filter on one trial. Filter collapse and divergence
/// are reported in the result rather than thrown. When `truth` is given it
/// is used instead of simulating a fresh path.
TrialOutput run_trial(const ScenarioConfig& config, std::size_t trial,
                      const TruthPath* truth = nullptr);

/// Validates the config, then runs every trial and writes into
/// config.output_dir: truth_<k>.csv (t,x,dz), estimate_<filter>_<k>.csv
/// (t,mean,variance,h_hat), optional snapshot_<k>_<t>.csv (x,p) and
/// report.txt. Throws ConfigError before touching the filesystem.
RunReport run_scenario(const ScenarioConfig& config);

/// Report as `key = value` text.
void write_report(const RunReport& report, std::ostream& out);

/// 0 on success, 3 if any trial collapsed, 4 if any diverged.
int exit_status(const RunReport& report);

struct ComparisonRow {
  std::string filter;
  std::size_t n_particles = 0;
  std::optional<double> alpha;
  std::optional<double> mse;
  double time_per_iteration = 0.0;
  std::size_t failures = 0;
  std::uint64_t dz_hash = 0;
};

/// Runs every config on shared truth paths: one path per (model
/// parameters, seed, trial) cell, so every filter in a cell consumes the
/// identical ΔZ sequence (checked by hash). Configs must share model family,
/// dt, horizon, seed and trial count; otherwise ConfigError.
std::vector<ComparisonRow> compare_filters(std::span<const ScenarioConfig> configs);

/// CSV with header `filter,N,alpha,mse,time_per_iter,failures,dz_hash`.
void write_comparison_csv(std::span<const ComparisonRow> rows, std::ostream& out);

struct GainDump {
  double time = 0.0;
  std::vector<double> positions;
  GainField gain;
};

/// Runs the FPF of trial 0 up to the step nearest `at` and returns the gain
/// that the next step would use.
GainDump gain_dump(const ScenarioConfig& config, double at);

}  // namespace fpf::harness
