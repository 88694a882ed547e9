/**
 * @file runner.hpp
 * @brief Batch commands behind the submersion_lab CLI and their report formats.
 *
 * Every command returns a RunReport. Reports render as JSON lines (one record
 * per line), a flat CSV, or a markdown table. Apart from the trailing timing
 * record, output depends only on the scenario configuration.
 */
#pragma once

#include "sublab/scenario.hpp"

#include <optional>
#include <string>
#include <vector>

namespace sublab {

inline constexpr const char* kToolName = "submersion_lab";
inline constexpr const char* kToolVersion = "0.1.0";

enum class ReportFormat { json, csv, md };
ReportFormat parse_report_format(const std::string& name);

struct CheckResult {
  std::string name;
  std::string status;                ///< "pass", "fail" or "info"
  double value = 0.0;
  std::optional<double> tolerance;   ///< absent for informational rows
  std::string detail;
  nlohmann::json witness;            ///< worst configuration, full coordinates
};

struct RunReport {
  std::string command;
  std::string scenario;
  nlohmann::json config;
  std::vector<CheckResult> checks;
  std::vector<nlohmann::json> records;  ///< certificates, tables, error payloads
  std::string status;
  int exit_code = 0;
  double wall_clock_seconds = 0.0;
};

/// Full invariant suite; exit code 2 when any check fails.
RunReport cmd_validate(const ScenarioConfig& config, bool parallel = true);
/// Obstruction verdict; 0 CONSISTENT, 2 VIOLATED, 1 INCONCLUSIVE or error.
RunReport cmd_check(const ScenarioConfig& config, bool parallel = true);
/// Sampled sectional curvatures of f*P.
RunReport cmd_curvature(const ScenarioConfig& config, bool parallel = true);

/// Report for a run that failed before producing results.
RunReport error_report(const std::string& command, const std::string& scenario,
                       const std::string& message, nlohmann::json payload = {});

std::string render(const RunReport& report, ReportFormat format);

/// Input problem in a run file; the message names the file, line and field.
class ReportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ReportRow {
  std::string scenario;
  std::string command;
  std::string check;
  std::string status;
  std::optional<double> value;
  std::optional<double> tolerance;
};

/// Reads the rows of a JSON-lines run file (check rows plus one summary row).
std::vector<ReportRow> read_run_file(const std::string& path);
/// Rows of all files, stably sorted by scenario name.
std::vector<ReportRow> merge_run_files(const std::vector<std::string>& paths);
std::string render_rows(const std::vector<ReportRow>& rows, ReportFormat format);

}  // namespace sublab
