#include "nsf/io.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <sstream>

#include "json.hpp"
#include "nsf/error.hpp"

#ifndef NSF_GIT_REVISION
#define NSF_GIT_REVISION "unknown"
#endif

namespace nsf {

using nlohmann::json;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& columns)
    : path_(path), width_(columns.size()), out_(path) {
  if (!out_) throw ConfigError("cannot write '" + path + "'");
  for (std::size_t k = 0; k < columns.size(); ++k) out_ << (k ? "," : "") << columns[k];
  out_ << '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != width_) throw std::invalid_argument("CSV row width mismatch");
  for (std::size_t k = 0; k < values.size(); ++k) out_ << (k ? "," : "") << format_double(values[k]);
  out_ << '\n';
  out_.flush();
}

void write_snapshot(const std::string& path, const Grid& grid, const SimulationState& state) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << "nsf-snapshot v1 t=" << format_double(state.t) << " nx=" << grid.nx() << " ny=" << grid.ny()
      << " n_modes=" << state.velocity.coeffs.size() << '\n';
  for (std::size_t k = 0; k < state.velocity.coeffs.size(); ++k)
    out << (k ? " " : "") << format_double(state.velocity.coeffs[k]);
  out << '\n';
  for (int j = 0; j < grid.py(); ++j) {
    for (int i = 0; i < grid.px(); ++i) out << (i ? " " : "") << format_double(state.theta(i, j));
    out << '\n';
  }
}

Snapshot read_snapshot(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open snapshot '" + path + "'");
  Snapshot s;
  std::string header;
  std::getline(in, header);
  if (header.rfind("nsf-snapshot v1", 0) != 0) throw ConfigError("'" + path + "' is not a snapshot");
  if (std::sscanf(header.c_str(), "nsf-snapshot v1 t=%lf nx=%d ny=%d n_modes=%d", &s.t, &s.nx, &s.ny,
                  &s.n_modes) != 4)
    throw ConfigError("malformed snapshot header in '" + path + "'");
  std::string line;
  std::getline(in, line);
  {
    std::istringstream ls(line);
    double v;
    while (ls >> v) s.coeffs.push_back(v);
  }
  double v;
  while (in >> v) s.theta.push_back(v);
  if (static_cast<int>(s.coeffs.size()) != s.n_modes ||
      s.theta.size() != static_cast<std::size_t>(s.nx + 2) * (s.ny + 2))
    throw ConfigError("snapshot '" + path + "' does not match its header");
  return s;
}

namespace {

json num(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

}  // namespace

void write_summary(const std::string& path, const RunResult& result) {
  json j;
  j["exit_status"] = static_cast<int>(result.status);
  j["message"] = result.message;
  j["steps"] = result.steps;
  j["mu"] = num(result.mu);
  if (!result.failed_invariant.empty()) {
    j["failed_invariant"] = result.failed_invariant;
    j["failed_step"] = result.failed_step;
  }
  json inv = json::object();
  for (const auto& [name, c] : result.invariants)
    inv[name] = {{"passed", c.passed}, {"worst", num(c.worst)}, {"limit", num(c.limit)}};
  j["invariants"] = inv;
  if (!result.records.empty()) {
    const auto& r = result.records.back();
    const auto cols = record_columns();
    const auto vals = record_values(r);
    json fin = json::object();
    for (std::size_t k = 0; k < cols.size(); ++k) fin[cols[k]] = num(vals[k]);
    j["final"] = fin;
    j["decay"]["final"] = {{"v_l2", num(r.decay.v_l2)}, {"theta_l1", num(r.decay.theta_l1)},
                           {"g_l2", num(r.decay.g_l2)}};
  }
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

void write_manifest(const std::string& dir, const Manifest& m) {
  json j;
  j["command"] = m.command;
  j["config"] = m.config_path;
  char hash[20];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(m.config_hash));
  j["config_hash_fnv1a64"] = hash;
  j["git_revision"] = m.git_revision;
  j["started"] = m.started;
  j["finished"] = m.finished;
  j["wall_seconds"] = m.wall_seconds;
  j["exit_status"] = m.exit_status;
  j["message"] = m.message;
  j["files"] = m.files;
  std::ofstream out(std::filesystem::path(dir) / "manifest.json");
  if (out) out << j.dump(2) << '\n';
}

std::string iso_timestamp_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string git_revision() { return NSF_GIT_REVISION; }

std::string resolve_out_dir(const std::string& configured) {
  if (!configured.empty()) return configured;
  if (const char* env = std::getenv("NSF_OUT_DIR"); env && *env) return env;
  return "out";
}

}  // namespace nsf
