#pragma once

#include <stdexcept>
#include <string>

namespace nsf {

/// Invalid or inconsistent configuration / problem data. Maps to CLI exit status 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A monitored structural property failed during a run. Maps to exit status 2.
class InvariantBreach : public std::runtime_error {
 public:
  InvariantBreach(std::string invariant, long step, const std::string& detail)
      : std::runtime_error("invariant '" + invariant + "' breached at step " +
                           std::to_string(step) + ": " + detail),
        invariant_(std::move(invariant)),
        step_(step) {}

  const std::string& invariant() const noexcept { return invariant_; }
  long step() const noexcept { return step_; }

 private:
  std::string invariant_;
  long step_;
};

/// Nonlinear or linear solver failure. Maps to exit status 3.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace nsf
