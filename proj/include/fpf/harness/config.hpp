#pragma once

#include "fpf/filter.hpp"
#include "fpf/gain.hpp"
#include "fpf/model.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fpf::harness {

enum class FilterKind { fpf, bootstrap, kalman, ks_oracle };

FilterKind filter_kind_from_name(std::string_view name);
std::string_view to_string(FilterKind kind);

/// Invalid configuration text or values. Raised before any simulation runs.
class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// One experiment. Serialized as flat `key = value` lines:
///
///   model = linear
///   model.alpha = -0.5
///   filter = fpf
///   gain = exact_linear
///   particles = 10000
///   dt = 0.01
///   horizon = 50
///   seed = 7
///
/// Optional keys: trials, output_dir, form, bandwidth, resample_threshold,
/// grid.cells, grid.lo, grid.hi, snapshots (comma-separated times).
struct ScenarioConfig {
  BuiltinModel model = BuiltinModel::linear;
  ParamMap model_params;
  FilterKind filter = FilterKind::fpf;
  /// Defaults to exact_linear for linear models, fourier_circle on the
  /// circle and dns otherwise.
  std::optional<GainMethod> gain_method;
  std::size_t n_particles = 1000;
  double dt = 0.01;
  double horizon = 1.0;
  std::uint64_t seed = 1;
  std::size_t trials = 1;
  std::filesystem::path output_dir;
  FpfForm form = FpfForm::stratonovich_euler;
  std::optional<double> bandwidth;
  double resample_threshold = 0.5;
  std::size_t grid_cells = 800;
  std::optional<double> grid_lo;
  std::optional<double> grid_hi;
  std::vector<double> snapshot_times;

  GainMethod resolved_gain_method() const;
  ScalarDiffusionModel build_model() const;

  /// Checks names, ranges and the model/filter/gain combination.
  /// Throws ConfigError.
  void validate() const;
};

/// Parses the key-value text. Unknown keys, duplicates and malformed values
/// throw ConfigError; the result is validated.
ScenarioConfig parse_config(std::string_view text);
ScenarioConfig load_config(const std::filesystem::path& path);

/// Canonical text: every field, fixed key order, shortest round-trip numbers.
std::string serialize_config(const ScenarioConfig& config);

/// FNV-1a of serialize_config().
std::uint64_t config_hash(const ScenarioConfig& config);

}  // namespace fpf::harness
