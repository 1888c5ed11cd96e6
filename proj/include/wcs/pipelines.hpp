#pragma once

#include <exception>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "wcs/config.hpp"
#include "wcs/report.hpp"

namespace wcs {

enum ExitCode : int { kExitOk = 0, kExitValidation = 2, kExitSolver = 3, kExitProperty = 4 };

struct PipelineOutput {
  nlohmann::json results = nlohmann::json::object();
  nlohmann::json thresholds = nlohmann::json::object();
  nlohmann::json timing = nlohmann::json::object();
  std::vector<CsvTable> tables;
  /// Human-readable descriptions of failed property checks.
  std::vector<std::string> failures;
  /// Informational notes (for example a skipped stage).
  std::vector<std::string> notes;
};

const std::vector<std::string>& subcommands();

/// Runs one subcommand. Library exceptions propagate; see exit_code_for.
PipelineOutput run_pipeline(const std::string& subcommand, const RunConfig& config);

/// 2 for configuration or precondition errors, 3 for solver failures, 4 for contradictions.
int exit_code_for(const std::exception_ptr& error);

/// Runs, validates and writes the report (json and/or csv per config.output). Diagnostics go to
/// `err`. Nothing is written unless the pipeline ran to completion.
int run(const std::string& subcommand, const RunConfig& config, std::ostream& err);

}  // namespace wcs
