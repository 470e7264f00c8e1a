#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "nsf/config.hpp"
#include "nsf/run.hpp"

namespace nsf {

struct RunCommand {
  std::string config_path;
  std::vector<std::string> overrides;  // key=value
  std::string out_dir;                 // overrides run.out_dir when set
};

/// Exit status: 0 clean, 1 usage/config error, 2 invariant breach, 3 solver failure.
int cmd_run(const RunCommand& cmd, std::ostream& out, std::ostream& err);

int cmd_verify(const std::string& scope, bool inject_broken_law, std::ostream& out, std::ostream& err);

struct StudyCommand {
  std::string kind;  // refinement | decay
  std::string config_path;
  int levels = 3;
  std::vector<std::string> overrides;
  std::string out_dir;
};

int cmd_study(const StudyCommand& cmd, std::ostream& out, std::ostream& err);

/// One rung of a refinement ladder.
struct Rung {
  int level = 0;
  int nx = 0, ny = 0;
  double h = 0.0, dt = 0.0;
  double error = 0.0;
  double perturbed = 0.0;  // entropy metric only: residual with eta scaled by 1.01
  double order = 0.0;      // against the previous rung; NaN on the first
};

struct LadderReport {
  std::vector<Rung> rungs;
  bool monotone = true;
  int offending = -1;  // first level whose error did not decrease
  double min_order = 0.0;
  double fitted_order = 0.0;  // least-squares slope of log error against log step
};

/// Runs the refinement ladder described by `base` and `study`. Level k halves h
/// (refine = space or both) and/or dt (time or both); refine = space scales dt with h^2.
LadderReport refinement_ladder(const SimulationConfig& base, const StudySpec& study, int levels);

}  // namespace nsf
