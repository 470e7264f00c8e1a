#include <iostream>

#include "CLI11.hpp"
#include "nsf/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Galerkin Navier-Stokes-Fourier simulator with structural diagnostics"};
  app.require_subcommand(1);

  nsf::RunCommand run;
  auto* run_cmd = app.add_subcommand("run", "Run a simulation from a config file");
  run_cmd->add_option("--config", run.config_path, "Config file (key=value lines)")->required();
  run_cmd->add_option("--set", run.overrides, "Override one key, key=value (repeatable)");
  run_cmd->add_option("--out", run.out_dir, "Output directory");

  std::string scope;
  bool inject = false;
  auto* verify_cmd = app.add_subcommand("verify", "Run the constitutive, truncation and basis property suites");
  verify_cmd->add_option("--scope", scope, "all | laws | truncation | basis")->default_val("all");
  verify_cmd->add_flag("--inject-broken-law", inject, "Add the law S = -D to the law suite (must fail)");

  nsf::StudyCommand study;
  auto* study_cmd = app.add_subcommand("study", "Refinement ladder or long-run decay study");
  study_cmd->add_option("--kind", study.kind, "refinement | decay")->required();
  study_cmd->add_option("--config", study.config_path, "Config file")->required();
  study_cmd->add_option("--levels", study.levels, "Number of rungs or horizons")->default_val(3);
  study_cmd->add_option("--set", study.overrides, "Override one key, key=value (repeatable)");
  study_cmd->add_option("--out", study.out_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (*run_cmd) return nsf::cmd_run(run, std::cout, std::cerr);
  if (*verify_cmd) return nsf::cmd_verify(scope, inject, std::cout, std::cerr);
  return nsf::cmd_study(study, std::cout, std::cerr);
}
