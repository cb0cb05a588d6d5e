// curveflow: run experiments, print stored verdicts, draw plots.
//
//   curveflow run --preset lp-decay-n2
//   curveflow run --config experiment.json [--out DIR]
//   curveflow report DIR
//   curveflow plot DIR
//
// Exit status: 0 all checks passed, 1 a check failed or the run aborted,
// 2 usage or configuration error.

#include "curveflow/harness.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace curveflow;

namespace {

int run_command(const std::string& config_file, const std::string& preset_name,
                const std::string& out_dir, bool quiet) {
  harness::ExperimentConfig config;
  try {
    config = preset_name.empty() ? harness::load_config(config_file) : harness::preset(preset_name);
  } catch (const CurveflowError& e) {
    std::cerr << "curveflow: " << e.what() << "\n";
    return 2;
  }
  if (!out_dir.empty()) config.output_dir = out_dir;
  try {
    const auto result = harness::run(config, quiet ? nullptr : &std::cerr);
    std::cout << harness::format_verdict(result.verdict);
    std::cout << "artifacts: " << result.output_dir.string() << "\n";
    return result.all_pass() ? 0 : 1;
  } catch (const CurveflowError& e) {
    std::cerr << "curveflow: error in " << harness::module_of(e.code()) << ": " << e.what() << "\n";
    return e.code() == ErrorCode::ConfigError ? 2 : 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Non-local curvature flows of closed plane curves"};
  app.require_subcommand(1);

  std::string config_file, preset_name, out_dir;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "Run an experiment and write its artifacts");
  auto* cfg_opt = run->add_option("--config", config_file, "JSON configuration file")
                      ->check(CLI::ExistingFile);
  auto* preset_opt = run->add_option("--preset", preset_name, "Named preset")
                         ->check(CLI::IsMember(harness::preset_names()));
  cfg_opt->excludes(preset_opt);
  run->add_option("--out", out_dir, "Output directory (default $CURVEFLOW_OUT/<name>)");
  run->add_flag("-q,--quiet", quiet, "No progress output");

  std::string dir;
  auto* report = app.add_subcommand("report", "Print the verdict stored in an output directory");
  report->add_option("dir", dir, "Output directory")->required();
  auto* plot = app.add_subcommand("plot", "Write SVG plots from an output directory");
  plot->add_option("dir", dir, "Output directory")->required();
  auto* presets = app.add_subcommand("presets", "List preset names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 2;
  }

  if (*run) {
    if (config_file.empty() && preset_name.empty()) {
      std::cerr << "curveflow run: one of --config or --preset is required\n";
      return 2;
    }
    return run_command(config_file, preset_name, out_dir, quiet);
  }
  if (*report) return harness::report(dir, std::cout);
  if (*plot) {
    try {
      for (const auto& f : harness::plot(dir)) std::cout << f.string() << "\n";
      return 0;
    } catch (const std::exception& e) {
      std::cerr << "curveflow plot: " << e.what() << "\n";
      return 2;
    }
  }
  if (*presets) {
    for (const auto& name : harness::preset_names()) std::cout << name << "\n";
    return 0;
  }
  return 2;
}
