#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "nsf/run.hpp"

namespace nsf {

/// Shortest round-trip form with 17 significant digits.
std::string format_double(double v);

/// Streams rows to a CSV file; the header is written on construction.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& columns);
  void row(const std::vector<double>& values);
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::size_t width_;
  std::ofstream out_;
};

/// Snapshot layout:
///   nsf-snapshot v1 t=<t> nx=<nx> ny=<ny> n_modes=<n>
///   <velocity coefficients, one line>
///   <theta, one line per grid row j = 0..ny+1, nodes i = 0..nx+1>
void write_snapshot(const std::string& path, const Grid& grid, const SimulationState& state);

struct Snapshot {
  double t = 0.0;
  int nx = 0, ny = 0, n_modes = 0;
  std::vector<double> coeffs;
  std::vector<double> theta;  // row-major, (nx+2)(ny+2)
};
Snapshot read_snapshot(const std::string& path);

/// Final diagnostics, invariant table and exit status as JSON.
void write_summary(const std::string& path, const RunResult& result);

struct Manifest {
  std::string command;
  std::string config_path;
  std::uint64_t config_hash = 0;
  std::string git_revision;
  std::string started;  // ISO 8601 UTC
  std::string finished;
  double wall_seconds = 0.0;
  int exit_status = 0;
  std::string message;
  std::vector<std::string> files;
};

void write_manifest(const std::string& dir, const Manifest& m);

std::string iso_timestamp_now();
std::string git_revision();

/// Output directory: explicit value, else NSF_OUT_DIR, else "out".
std::string resolve_out_dir(const std::string& configured);

}  // namespace nsf
