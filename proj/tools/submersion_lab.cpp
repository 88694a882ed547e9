// submersion_lab: batch front-end for pull-back bundle curvature checks.
//
//   submersion_lab validate  --config scenario.json [--seed N] [--samples N] [--fd-step h]
//   submersion_lab check     --config scenario.json ...
//   submersion_lab curvature --config scenario.json ...
//   submersion_lab report    run1.jsonl run2.jsonl ... [--format md|csv|json]
//
// Exit codes: 0 pass / consistent, 2 violation, 1 error.

#include "sublab/runner.hpp"
#include "sublab/sampling.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>

namespace {

struct RunFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> samples;
  std::optional<double> fd_step;
  std::string out;
  std::string format = "json";
  bool serial = false;
};

void add_run_flags(CLI::App* cmd, RunFlags& flags) {
  cmd->add_option("--config", flags.config, "Scenario file (JSON)")->required();
  cmd->add_option("--seed", flags.seed, "Override the scenario seed");
  cmd->add_option("--samples", flags.samples, "Override the sample count")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--fd-step", flags.fd_step, "Override the finite-difference step")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--out", flags.out, "Write the report here instead of stdout");
  cmd->add_option("--format", flags.format, "Report format")
      ->check(CLI::IsMember({"json", "csv", "md"}));
  cmd->add_flag("--serial", flags.serial, "Use the serial reference driver");
}

int emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return 0;
  }
  std::ofstream out(path);
  if (!out) {
    std::cerr << "error: cannot write '" << path << "'\n";
    return 1;
  }
  out << text;
  return 0;
}

int run(const std::string& command, const RunFlags& flags) {
  using namespace sublab;
  const auto format = parse_report_format(flags.format);
  RunReport report;
  std::string scenario_name;
  try {
    ScenarioConfig config = load_scenario(flags.config);
    scenario_name = config.name;
    if (flags.seed) config.seed = *flags.seed;
    if (flags.samples) config.samples = *flags.samples;
    if (flags.fd_step) config.fd_step = *flags.fd_step;
    const bool parallel = !flags.serial;
    if (command == "validate") report = cmd_validate(config, parallel);
    else if (command == "check") report = cmd_check(config, parallel);
    else report = cmd_curvature(config, parallel);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    report = error_report(command, scenario_name, e.what());
  }
  for (const auto& r : report.records) {
    if (r.value("record", "") == "error") std::cerr << "error: " << r.value("message", "") << '\n';
  }
  if (emit(render(report, format), flags.out) != 0) return 1;
  return report.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  sublab::apply_thread_cap();
  CLI::App app{"Curvature obstructions on pull-backs of Hopf-type bundles"};
  app.require_subcommand(1);
  app.set_version_flag("--version", sublab::kToolVersion);

  RunFlags validate_flags, check_flags, curvature_flags;
  auto* validate = app.add_subcommand("validate", "Run the invariant suite");
  add_run_flags(validate, validate_flags);
  auto* check = app.add_subcommand("check", "Obstruction verdict with certificates");
  add_run_flags(check, check_flags);
  auto* curvature = app.add_subcommand("curvature", "Sampled sectional curvatures of f*P");
  add_run_flags(curvature, curvature_flags);

  std::vector<std::string> files;
  std::string report_out, report_format = "md";
  auto* report = app.add_subcommand("report", "Merge run files into one table");
  report->add_option("files", files, "JSON-lines run files")->required();
  report->add_option("--out", report_out, "Write the table here instead of stdout");
  report->add_option("--format", report_format, "Table format")
      ->check(CLI::IsMember({"json", "csv", "md"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (*validate) return run("validate", validate_flags);
  if (*check) return run("check", check_flags);
  if (*curvature) return run("curvature", curvature_flags);
  try {
    const auto rows = sublab::merge_run_files(files);
    return emit(sublab::render_rows(rows, sublab::parse_report_format(report_format)), report_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
