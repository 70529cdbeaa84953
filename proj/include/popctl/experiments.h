#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "popctl/config.h"
#include "popctl/controller.h"
#include "popctl/dynamics.h"

namespace popctl {

struct PolicyRun {
  std::string policy;
  Trajectory trajectory;
  std::optional<GpcDiagnostics> diagnostics;
};

struct SummaryRow {
  std::string policy;
  double total_cost = 0.0;
  double regret_vs_best = 0.0;
};

struct ExperimentRun {
  std::string experiment;
  std::uint64_t seed = 0;
  // The learning controller first, then baselines.
  std::vector<PolicyRun> policies;
  std::vector<SummaryRow> summary;
  // Additional CSV files: (file name, contents).
  std::vector<std::pair<std::string, std::string>> tables;
};

const std::vector<std::string>& experiment_names();

// Equations and defaults of a named experiment. Throws Error listing the
// valid names for an unknown one.
std::string describe_experiment(const std::string& name);

// Validates the configuration, then runs every policy of the experiment.
ExperimentRun execute_experiment(const Config& cfg);

// Writes <experiment>_<policy>.csv, diagnostics, tables and summary.jsonl
// into `dir`; returns the paths written.
std::vector<std::string> write_experiment(const ExperimentRun& run,
                                          const std::string& dir);

// Controller options from the shared keys (H, step_size, eta, ...).
GpcOptions gpc_options_from_config(const Config& cfg, int T, double lipschitz,
                                   MirrorMethod default_method);

}  // namespace popctl
