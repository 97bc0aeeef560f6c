#pragma once

// Config-driven experiments. Each acceptance criterion maps to one experiment name.

#include "layerpot/io.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace layerpot::exp {

struct ExperimentConfig {
  std::string experiment;
  std::string params_json = "{}";            // experiment parameters
  std::uint64_t seed = 7;
  std::string output_dir;                    // empty: do not write files
  std::map<std::string, std::string> overrides;  // flag overrides, win over params_json
};

/// Parses {"experiment":..., "seed":..., "output_dir":..., "params":{...}}.
ExperimentConfig config_from_json(std::string_view text);

struct CheckResult {
  int criterion = 0;  // acceptance criterion number, 0 for auxiliary checks
  std::string name;
  bool pass = false;
  double measured = 0;
  double threshold = 0;
  std::string detail;
};

struct ReportBundle {
  std::string experiment;
  std::uint64_t seed = 0;
  std::string summary_json;
  std::vector<io::Table> tables;
  std::vector<CheckResult> checks;
  std::string digest;
  double runtime_s = 0;
  bool pass = false;

  const io::Table* table(const std::string& name) const;
};

const std::vector<std::string>& experiment_names();

/// Criterion number -> experiment name.
std::string experiment_for_criterion(int criterion);

/// Throws ConfigError on an unknown experiment or bad parameters.
ReportBundle run_experiment(const ExperimentConfig& cfg);

/// Writes summary.json, digest.txt and one CSV per table into dir.
void write_bundle(const ReportBundle& report, const std::string& dir);

/// Selector "x,y" or "table:x,y"; writes two-column CSVs and returns their paths.
/// Throws ConfigError listing available columns for a bad selector.
std::vector<std::string> emit_plotdata(const ReportBundle& report, const std::vector<std::string>& selectors,
                                       const std::string& dir);

}  // namespace layerpot::exp
