#pragma once

#include <cstdint>
#include <string>

#include "config.hpp"
#include "json.hpp"

namespace qfc::cli {

struct RunSummary {
  std::string scenario;
  std::uint64_t seed = 0;
  double dt = 0.0;
  nlohmann::json results;  // deterministic scalar block
  double wall_clock_s = 0.0;
};

/// Executes the scenario, writing series CSVs into cfg.out_dir when
/// write_series is set. Numerical aborts propagate as NumericalError;
/// output failures as IoError.
RunSummary run_scenario(const ScenarioConfig& cfg);

nlohmann::json summary_to_json(const RunSummary& summary);

/// Writes <out_dir>/<scenario>_summary.json and returns its path.
std::string write_summary(const ScenarioConfig& cfg, const RunSummary& summary);

/// Full command-line entry point (subcommands: run, validate). Exit codes:
/// 0 success, 2 configuration or usage error, 3 numerical abort, 4 output
/// I/O error, 1 unexpected internal error.
int cli_main(int argc, char** argv);

}  // namespace qfc::cli
