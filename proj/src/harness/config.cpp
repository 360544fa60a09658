#include "fpf/harness/config.hpp"

#include "fpf/csv.hpp"
#include "fpf/simulate.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace fpf::harness {

FilterKind filter_kind_from_name(std::string_view name) {
  if (name == "fpf") return FilterKind::fpf;
  if (name == "bootstrap") return FilterKind::bootstrap;
  if (name == "kalman") return FilterKind::kalman;
  if (name == "ks_oracle") return FilterKind::ks_oracle;
  throw ConfigError("unknown filter '" + std::string(name) + "'");
}

std::string_view to_string(FilterKind kind) {
  switch (kind) {
    case FilterKind::fpf:
      return "fpf";
    case FilterKind::bootstrap:
      return "bootstrap";
    case FilterKind::kalman:
      return "kalman";
    case FilterKind::ks_oracle:
      return "ks_oracle";
  }
  return "?";
}

GainMethod ScenarioConfig::resolved_gain_method() const {
  if (gain_method) {
    return *gain_method;
  }
  switch (model) {
    case BuiltinModel::linear:
      return GainMethod::exact_linear;
    case BuiltinModel::oscillator:
      return GainMethod::fourier_circle;
    case BuiltinModel::double_well:
      return GainMethod::dns;
  }
  return GainMethod::dns;
}

ScalarDiffusionModel ScenarioConfig::build_model() const {
  try {
    return make_builtin_model(model, model_params);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

void ScenarioConfig::validate() const {
  const ScalarDiffusionModel m = build_model();
  try {
    step_count(dt, horizon);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (n_particles < 2 && (filter == FilterKind::fpf || filter == FilterKind::bootstrap)) {
    throw ConfigError("particles must be at least 2");
  }
  if (trials < 1) {
    throw ConfigError("trials must be positive");
  }
  if (!(resample_threshold > 0.0 && resample_threshold <= 1.0)) {
    throw ConfigError("resample_threshold must lie in (0, 1]");
  }
  if (bandwidth && !(*bandwidth > 0.0)) {
    throw ConfigError("bandwidth must be positive");
  }
  if (grid_cells < 2) {
    throw ConfigError("grid.cells must be at least 2");
  }
  if (grid_lo.has_value() != grid_hi.has_value()) {
    throw ConfigError("grid.lo and grid.hi must be given together");
  }
  if (grid_lo && !(*grid_hi > *grid_lo)) {
    throw ConfigError("grid.hi must exceed grid.lo");
  }
  if (filter == FilterKind::kalman && !m.linear_params()) {
    throw ConfigError("the kalman filter needs the linear model");
  }
  if (filter == FilterKind::fpf) {
    const GainMethod g = resolved_gain_method();
    if (g == GainMethod::exact_linear && !m.linear_params()) {
      throw ConfigError("exact_linear gain needs the linear model");
    }
    if (g == GainMethod::fourier_circle && m.geometry() != Geometry::circle) {
      throw ConfigError("fourier_circle gain needs a circle model");
    }
    if (g == GainMethod::dns && m.geometry() != Geometry::line) {
      throw ConfigError("dns gain needs a line model");
    }
  }
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double number(std::string_view key, std::string_view value) {
  try {
    const double v = parse_double(value);
    if (!std::isfinite(v)) {
      throw std::invalid_argument("not finite");
    }
    return v;
  } catch (const std::invalid_argument&) {
    throw ConfigError("key '" + std::string(key) + "': expected a number, got '" +
                      std::string(value) + "'");
  }
}

std::uint64_t unsigned_integer(std::string_view key, std::string_view value) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc{} || ptr != value.data() + value.size() || value.empty()) {
    throw ConfigError("key '" + std::string(key) + "': expected a nonnegative integer, got '" +
                      std::string(value) + "'");
  }
  return v;
}

template <typename F>
auto named(F&& parse, std::string_view value) {
  try {
    return parse(value);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace

ScenarioConfig parse_config(std::string_view text) {
  ScenarioConfig cfg;
  std::set<std::string, std::less<>> seen;
  bool have_model = false;

  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    }
    if (!seen.emplace(key).second) {
      throw ConfigError("duplicate key '" + std::string(key) + "'");
    }

    if (key == "model") {
      cfg.model = named([](std::string_view v) { return builtin_model_from_name(v); }, value);
      have_model = true;
    } else if (key.starts_with("model.")) {
      cfg.model_params[std::string(key.substr(6))] = number(key, value);
    } else if (key == "filter") {
      cfg.filter = filter_kind_from_name(value);
    } else if (key == "gain") {
      cfg.gain_method = named([](std::string_view v) { return gain_method_from_name(v); }, value);
    } else if (key == "particles") {
      cfg.n_particles = unsigned_integer(key, value);
    } else if (key == "dt") {
      cfg.dt = number(key, value);
    } else if (key == "horizon") {
      cfg.horizon = number(key, value);
    } else if (key == "seed") {
      cfg.seed = unsigned_integer(key, value);
    } else if (key == "trials") {
      cfg.trials = unsigned_integer(key, value);
    } else if (key == "output_dir") {
      cfg.output_dir = std::string(value);
    } else if (key == "form") {
      cfg.form = named([](std::string_view v) { return fpf_form_from_name(v); }, value);
    } else if (key == "bandwidth") {
      cfg.bandwidth = number(key, value);
    } else if (key == "resample_threshold") {
      cfg.resample_threshold = number(key, value);
    } else if (key == "grid.cells") {
      cfg.grid_cells = unsigned_integer(key, value);
    } else if (key == "grid.lo") {
      cfg.grid_lo = number(key, value);
    } else if (key == "grid.hi") {
      cfg.grid_hi = number(key, value);
    } else if (key == "snapshots") {
      std::string_view rest = value;
      while (!rest.empty()) {
        const auto comma = rest.find(',');
        cfg.snapshot_times.push_back(number(key, trim(rest.substr(0, comma))));
        rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
      }
    } else {
      throw ConfigError("unknown key '" + std::string(key) + "'");
    }
  }
  if (!have_model) {
    throw ConfigError("missing key 'model'");
  }
  cfg.validate();
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot read config file '" + path.string() + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const ScenarioConfig& c) {
  std::ostringstream out;
  out << "model = " << to_string(c.model) << '\n';
  for (const auto& [key, value] : c.model_params) {
    out << "model." << key << " = " << format_double(value) << '\n';
  }
  out << "filter = " << to_string(c.filter) << '\n';
  if (c.gain_method) {
    out << "gain = " << to_string(*c.gain_method) << '\n';
  }
  out << "particles = " << c.n_particles << '\n';
  out << "dt = " << format_double(c.dt) << '\n';
  out << "horizon = " << format_double(c.horizon) << '\n';
  out << "seed = " << c.seed << '\n';
  out << "trials = " << c.trials << '\n';
  if (!c.output_dir.empty()) {
    out << "output_dir = " << c.output_dir.string() << '\n';
  }
  out << "form = " << to_string(c.form) << '\n';
  if (c.bandwidth) {
    out << "bandwidth = " << format_double(*c.bandwidth) << '\n';
  }
  out << "resample_threshold = " << format_double(c.resample_threshold) << '\n';
  out << "grid.cells = " << c.grid_cells << '\n';
  if (c.grid_lo) {
    out << "grid.lo = " << format_double(*c.grid_lo) << '\n';
    out << "grid.hi = " << format_double(*c.grid_hi) << '\n';
  }
  if (!c.snapshot_times.empty()) {
    out << "snapshots = ";
    for (std::size_t i = 0; i < c.snapshot_times.size(); ++i) {
      out << (i ? "," : "") << format_double(c.snapshot_times[i]);
    }
    out << '\n';
  }
  return out.str();
}

std::uint64_t config_hash(const ScenarioConfig& config) {
  return fnv1a(serialize_config(config));
}

}  // namespace fpf::harness
