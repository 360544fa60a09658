// Command-line driver for filtering scenarios.
//
//   fpf run <config> [--seed S] [--out DIR] [--trials N]
//   fpf compare <config>... [--out DIR] [--seed S] [--trials N]
//   fpf gaindump <config> --at T [--out DIR] [--seed S]
//
// The output directory defaults to the config's output_dir, then to
// $FPF_OUTPUT_DIR, then to ./fpf_out.
//
// Exit status: 0 success, 2 usage/config error, 3 filter collapse,
// 4 divergence, 1 anything else.

#include "fpf/csv.hpp"
#include "fpf/harness/config.hpp"
#include "fpf/harness/scenario.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

constexpr int kUsageError = 2;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> trials;
};

void apply(fpf::harness::ScenarioConfig& config, const Overrides& o) {
  if (o.seed) config.seed = *o.seed;
  if (o.trials) config.trials = *o.trials;
  if (o.out) {
    config.output_dir = *o.out;
  } else if (config.output_dir.empty()) {
    const char* env = std::getenv("FPF_OUTPUT_DIR");
    config.output_dir = env && *env ? env : "fpf_out";
  }
  config.validate();
}

void add_overrides(CLI::App* cmd, Overrides& o, bool with_trials) {
  cmd->add_option("--seed", o.seed, "Override the config seed");
  cmd->add_option("--out", o.out, "Output directory");
  if (with_trials) {
    cmd->add_option("--trials", o.trials, "Override the number of trials");
  }
}

int run(const std::string& path, const Overrides& o) {
  auto config = fpf::harness::load_config(path);
  apply(config, o);
  const auto report = fpf::harness::run_scenario(config);
  fpf::harness::write_report(report, std::cout);
  return fpf::harness::exit_status(report);
}

int compare(const std::vector<std::string>& paths, const Overrides& o) {
  std::vector<fpf::harness::ScenarioConfig> configs;
  for (const auto& p : paths) {
    configs.push_back(fpf::harness::load_config(p));
    apply(configs.back(), o);
  }
  const auto rows = fpf::harness::compare_filters(configs);
  const auto dir = configs.front().output_dir;
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / "comparison.csv", std::ios::binary);
  fpf::harness::write_comparison_csv(rows, out);
  fpf::harness::write_comparison_csv(rows, std::cout);
  return out ? 0 : 1;
}

int gaindump(const std::string& path, double at, const Overrides& o) {
  auto config = fpf::harness::load_config(path);
  apply(config, o);
  const auto dump = fpf::harness::gain_dump(config, at);
  std::filesystem::create_directories(config.output_dir);
  const auto file = config.output_dir / ("gain_t" + fpf::format_double(dump.time) + ".csv");
  std::ofstream out(file, std::ios::binary);
  fpf::write_gain_csv(dump.positions, dump.gain, out);
  std::cout << "wrote " << file.string() << " (clipped=" << dump.gain.clipped
            << ", floored=" << dump.gain.floored << ")\n";
  return out ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Feedback particle filter experiments"};
  app.require_subcommand(1);

  Overrides run_o;
  std::string run_path;
  auto* run_cmd = app.add_subcommand("run", "Run one scenario");
  run_cmd->add_option("config", run_path, "Scenario file")->required()->check(CLI::ExistingFile);
  add_overrides(run_cmd, run_o, true);

  Overrides cmp_o;
  std::vector<std::string> cmp_paths;
  auto* cmp_cmd = app.add_subcommand("compare", "Run several scenarios on shared truth paths");
  cmp_cmd->add_option("configs", cmp_paths, "Scenario files")->required()->check(CLI::ExistingFile);
  add_overrides(cmp_cmd, cmp_o, true);

  Overrides gd_o;
  std::string gd_path;
  double gd_at = 0.0;
  auto* gd_cmd = app.add_subcommand("gaindump", "Dump the FPF gain at a given time");
  gd_cmd->add_option("config", gd_path, "Scenario file")->required()->check(CLI::ExistingFile);
  gd_cmd->add_option("--at", gd_at, "Time at which to evaluate the gain")->required();
  add_overrides(gd_cmd, gd_o, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (*run_cmd) return run(run_path, run_o);
    if (*cmp_cmd) return compare(cmp_paths, cmp_o);
    if (*gd_cmd) return gaindump(gd_path, gd_at, gd_o);
  } catch (const fpf::harness::ConfigError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kUsageError;
}
