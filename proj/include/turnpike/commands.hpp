#pragma once

#include <string>
#include <vector>

namespace turnpike::cli {

inline constexpr const char* kToolVersion = "0.3.0";

// Process exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;       // bad flags, unreadable or invalid scenario
inline constexpr int kExitNoConverge = 2;  // solver or root finder missed its tolerance
inline constexpr int kExitInternal = 3;    // invariant breach mid-computation

/// Options collected from the command line. Zero/negative sentinel values
/// mean "use what the scenario file says".
struct CommandOptions {
  std::string scenario_path;
  std::string out_dir;
  std::vector<double> T_list;  // sweep horizons
  int nodes = 0;               // > 0 overrides the scenario's N
  double tol = 0.0;            // > 0 overrides solver.tol_kkt
  long seed = -1;              // >= 0 overrides solver.seed
};

/// Transcribes and solves the scenario; writes trajectory.csv,
/// metrics.json, and manifest.txt into the output directory.
int cmd_solve(const CommandOptions& opts);

/// Closed-form point-mass solution; the CSV gains lambda_1, lambda_2
/// columns. Rejects scenarios the closed form does not cover.
int cmd_analytic(const CommandOptions& opts);

/// Solves the scenario over --T-list, writes one bundle per horizon plus
/// a combined turnpike report; the closed form is used when available.
int cmd_sweep(const CommandOptions& opts);

/// Derivative, equivariance, and steady-state self-checks; prints a
/// pass/fail table to stdout.
int cmd_check(const CommandOptions& opts);

/// Lists velocity steady states for the scenario's model and the one of
/// minimal stage cost.
int cmd_trims(const CommandOptions& opts);

}  // namespace turnpike::cli
