#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "nsf/diagnostics.hpp"
#include "nsf/solver.hpp"

namespace nsf {

enum class RunStatus { Clean = 0, ConfigFailure = 1, InvariantBreach = 2, SolverFailure = 3 };

/// Pass/fail of the properties monitored over a whole run.
struct InvariantCheck {
  bool passed = true;
  double worst = 0.0;  // worst observed value of the monitored quantity
  double limit = 0.0;
  std::string detail;
};

struct RunOptions {
  bool keep_trajectory = false;
  /// Called for every record (including t = 0) after it is computed.
  std::function<void(const SimulationState&, const DiagnosticsRecord&)> on_record;
};

struct RunResult {
  RunStatus status = RunStatus::Clean;
  std::string message;
  std::string failed_invariant;
  long failed_step = -1;
  std::vector<DiagnosticsRecord> records;
  Trajectory trajectory;  // every step when keep_trajectory is set
  std::optional<SimulationState> final_state;
  std::map<std::string, InvariantCheck> invariants;
  double mu = 0.0;
  int steps = 0;
};

/// Steps the coupled system to t_end, records diagnostics every record_every steps, and
/// monitors the structural invariants. Aborts with InvariantBreach status when the minimum
/// principle, heating consistency, entropy production sign or finiteness fails.
RunResult run(Problem& problem, const RunOptions& options = {});

/// Builds the problem from a configuration and runs it; configuration errors are reported
/// through the status instead of thrown.
RunResult run(const SimulationConfig& config, const RunOptions& options = {});

int exit_code(RunStatus status);

}  // namespace nsf
