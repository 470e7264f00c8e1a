#include "nsf/commands.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <limits>
#include <ostream>

#include "json.hpp"
#include "nsf/diagnostics.hpp"
#include "nsf/error.hpp"
#include "nsf/io.hpp"
#include "nsf/verify.hpp"

namespace fs = std::filesystem;

namespace nsf {

namespace {

/// Collects artifacts and writes the manifest when it goes out of scope.
class ManifestScope {
 public:
  ManifestScope(std::string command, std::string config_path)
      : t0_(std::chrono::steady_clock::now()) {
    m_.command = std::move(command);
    m_.config_path = std::move(config_path);
    m_.started = iso_timestamp_now();
    m_.git_revision = git_revision();
  }
  ~ManifestScope() {
    if (dir_.empty()) return;
    m_.finished = iso_timestamp_now();
    m_.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    m_.files.push_back("manifest.json");
    try {
      write_manifest(dir_, m_);
    } catch (...) {
    }
  }
  void set_dir(const std::string& dir) { dir_ = dir; }
  const std::string& dir() const { return dir_; }
  void set_hash(std::uint64_t h) { m_.config_hash = h; }
  void add(const std::string& name) { m_.files.push_back(name); }
  std::string path(const std::string& name) const { return (fs::path(dir_) / name).string(); }
  int finish(int status, const std::string& message) {
    m_.exit_status = status;
    m_.message = message;
    return status;
  }

 private:
  std::chrono::steady_clock::time_point t0_;
  std::string dir_;
  Manifest m_;
};

void prepare_dir(const std::string& dir, const std::vector<std::string>& stale_prefixes) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    for (const auto& p : stale_prefixes)
      if (name.rfind(p, 0) == 0) fs::remove(entry.path());
  }
}

RawConfig load_with_overrides(const std::string& path, const std::vector<std::string>& overrides) {
  RawConfig raw = path.empty() ? RawConfig{} : load_config(path);
  for (const auto& o : overrides) apply_override(raw, o);
  return raw;
}

std::string snapshot_name(long step) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "snapshot_%08ld.txt", step);
  return buf;
}

double mms_error(const RunResult& r, const Problem& problem) {
  const auto& s = *r.final_state;
  const auto& ms = problem.config().mms_solution;
  const Grid& g = problem.grid();
  double e = 0.0;
  for (int j = 1; j <= g.ny(); ++j)
    for (int i = 1; i <= g.nx(); ++i) e = std::max(e, std::abs(s.theta(i, j) - ms.value(s.t, g.x(i), g.y(j))));
  return e;
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sx += x[k];
    sy += y[k];
    sxx += x[k] * x[k];
    sxy += x[k] * y[k];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

int cmd_run(const RunCommand& cmd, std::ostream& out, std::ostream& err) {
  ManifestScope manifest("run", cmd.config_path);
  try {
    const RawConfig raw = load_with_overrides(cmd.config_path, cmd.overrides);
    manifest.set_hash(fnv1a64(raw.canonical()));
    const std::string configured = cmd.out_dir.empty() && raw.has("run.out_dir") ? raw.get("run.out_dir") : cmd.out_dir;
    const std::string dir = resolve_out_dir(configured);
    prepare_dir(dir, {"snapshot_", "diagnostics.csv", "summary.json", "manifest.json"});
    manifest.set_dir(dir);

    SimulationConfig cfg = to_simulation_config(raw);
    cfg.out_dir = dir;
    Problem problem(cfg);

    CsvWriter csv(manifest.path("diagnostics.csv"), record_columns());
    manifest.add("diagnostics.csv");
    RunOptions opts;
    opts.on_record = [&](const SimulationState& s, const DiagnosticsRecord& r) {
      csv.row(record_values(r));
      if (cfg.write_snapshots) {
        const std::string name = snapshot_name(s.step);
        write_snapshot(manifest.path(name), problem.grid(), s);
        manifest.add(name);
      }
    };
    const RunResult res = run(problem, opts);
    write_summary(manifest.path("summary.json"), res);
    manifest.add("summary.json");

    const int status = exit_code(res.status);
    if (status == 0) {
      out << "run complete: " << res.steps << " steps, " << res.records.size() << " records, mu = "
          << format_double(res.mu) << "\n";
      for (const auto& [name, c] : res.invariants)
        out << "  " << (c.passed ? "pass" : "FAIL") << "  " << name << "  worst " << format_double(c.worst) << "\n";
      out << "outputs in " << dir << "\n";
    } else {
      err << "run failed (exit " << status << "): " << res.message << "\n";
    }
    return manifest.finish(status, res.message);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    if (manifest.dir().empty()) {
      // Manifest still goes somewhere when the output directory is known.
      const std::string dir = resolve_out_dir(cmd.out_dir);
      std::error_code ec;
      fs::create_directories(dir, ec);
      if (!ec) manifest.set_dir(dir);
    }
    return manifest.finish(1, e.what());
  } catch (const InvariantBreach& e) {
    err << "invariant breach: " << e.what() << "\n";
    return manifest.finish(2, e.what());
  } catch (const std::exception& e) {
    err << "solver failure: " << e.what() << "\n";
    return manifest.finish(3, e.what());
  }
}

int cmd_verify(const std::string& scope, bool inject_broken_law, std::ostream& out, std::ostream& err) {
  if (scope.empty()) {
    err << "usage: verify --scope all|laws|truncation|basis\n";
    return 1;
  }
  try {
    VerifyOptions opts;
    opts.inject_broken_law = inject_broken_law;
    const auto rows = verify_scope(scope, opts);
    print_verify_table(out, rows);
    return all_passed(rows) ? 0 : 2;
  } catch (const ConfigError& e) {
    err << "usage error: " << e.what() << "\n";
    return 1;
  }
}

LadderReport refinement_ladder(const SimulationConfig& base, const StudySpec& study, int levels) {
  if (levels < 2) throw ConfigError("a refinement ladder needs at least two levels");
  if (study.metric == "mms" && !base.mms) throw ConfigError("study.metric = mms needs mms.enabled = true");
  LadderReport rep;
  const bool space = study.refine == "space" || study.refine == "both";
  const bool time = study.refine == "time" || study.refine == "both";
  for (int k = 0; k < levels; ++k) {
    SimulationConfig cfg = base;
    const int f = 1 << k;
    if (space) {
      cfg.nx = (base.nx + 1) * f - 1;
      cfg.ny = (base.ny + 1) * f - 1;
    }
    if (time) cfg.dt = base.dt / f;
    else if (space) cfg.dt = base.dt / (f * f);
    cfg.record_every = std::numeric_limits<int>::max() / 2;

    Problem problem(cfg);
    RunOptions opts;
    opts.keep_trajectory = study.metric != "mms";
    const RunResult res = run(problem, opts);
    if (res.status != RunStatus::Clean)
      throw SolverError("level " + std::to_string(k) + " failed: " + res.message);

    Rung r;
    r.level = k;
    r.nx = cfg.nx;
    r.ny = cfg.ny;
    r.h = cfg.lx / (cfg.nx + 1);
    r.dt = cfg.dt;
    if (study.metric == "mms") {
      r.error = mms_error(res, problem);
    } else if (study.metric == "entropy") {
      TestFunction phi;
      phi.x = {study.phi_cx * cfg.lx, study.phi_width * cfg.lx};
      phi.y = {study.phi_cy * cfg.ly, study.phi_width * cfg.ly};
      phi.t = Bump{study.phi_t_center, study.phi_t_width};
      r.error = weak_residual_entropy(problem, res.trajectory, phi).normalized;
      EntropyResidualOptions eo;
      eo.eta_scale = 1.01;
      r.perturbed = weak_residual_entropy(problem, res.trajectory, phi, eo).normalized;
    } else {
      const double M = study.M > 0 ? study.M : cfg.diag_M;
      const double delta = study.delta > 0 ? study.delta : cfg.diag_delta;
      r.error = std::abs(truncated_energy_identity(problem, res.trajectory, M, delta).normalized);
    }
    r.order = std::numeric_limits<double>::quiet_NaN();
    rep.rungs.push_back(r);
  }

  std::vector<double> lx, ly;
  rep.min_order = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < rep.rungs.size(); ++k) {
    auto& r = rep.rungs[k];
    const double step = time && !space ? r.dt : r.h;
    lx.push_back(std::log(step));
    ly.push_back(std::log(std::max(r.error, 1e-300)));
    if (k == 0) continue;
    const auto& p = rep.rungs[k - 1];
    const double pstep = time && !space ? p.dt : p.h;
    r.order = std::log(p.error / r.error) / std::log(pstep / step);
    rep.min_order = std::min(rep.min_order, r.order);
    if (!(r.error < p.error) && rep.monotone) {
      rep.monotone = false;
      rep.offending = static_cast<int>(k);
    }
  }
  rep.fitted_order = fit_slope(lx, ly);
  return rep;
}

namespace {

int study_refinement(const StudyCommand& cmd, const RawConfig& raw, ManifestScope& manifest, std::ostream& out,
                     std::ostream& err) {
  const SimulationConfig base = to_simulation_config(raw);
  const StudySpec study = to_study_spec(raw);
  const LadderReport rep = refinement_ladder(base, study, cmd.levels);

  const bool entropy = study.metric == "entropy";
  std::vector<std::string> cols = {"level", "nx", "ny", "h", "dt", "error", "order"};
  if (entropy) {
    cols.push_back("perturbed");
    cols.push_back("detector_ratio");
  }
  {
    CsvWriter csv(manifest.path("ladder.csv"), cols);
    manifest.add("ladder.csv");
    for (const auto& r : rep.rungs) {
      std::vector<double> row = {double(r.level), double(r.nx), double(r.ny), r.h, r.dt, r.error, r.order};
      if (entropy) {
        row.push_back(r.perturbed);
        row.push_back(r.perturbed / r.error);
      }
      csv.row(row);
    }
  }
  nlohmann::json j;
  j["kind"] = "refinement";
  j["metric"] = study.metric;
  j["refine"] = study.refine;
  j["monotone"] = rep.monotone;
  j["min_order"] = rep.min_order;
  j["fitted_order"] = rep.fitted_order;
  j["orders"] = nlohmann::json::array();
  for (std::size_t k = 1; k < rep.rungs.size(); ++k) j["orders"].push_back(rep.rungs[k].order);
  j["errors"] = nlohmann::json::array();
  for (const auto& r : rep.rungs) j["errors"].push_back(r.error);
  if (entropy) {
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& r : rep.rungs) worst = std::min(worst, r.perturbed / r.error);
    j["min_detector_ratio"] = worst;
  }
  {
    std::ofstream o(manifest.path("orders.json"));
    o << j.dump(2) << '\n';
    manifest.add("orders.json");
  }

  for (const auto& r : rep.rungs)
    out << "level " << r.level << "  h " << format_double(r.h) << "  dt " << format_double(r.dt) << "  error "
        << format_double(r.error) << (r.level ? "  order " + format_double(r.order) : "") << "\n";
  out << "fitted order " << format_double(rep.fitted_order) << "\n";
  if (!rep.monotone) {
    const auto& a = rep.rungs[static_cast<std::size_t>(rep.offending) - 1];
    const auto& b = rep.rungs[static_cast<std::size_t>(rep.offending)];
    const std::string msg = "non-monotone ladder: level " + std::to_string(a.level) + " error " +
                            format_double(a.error) + " -> level " + std::to_string(b.level) + " error " +
                            format_double(b.error);
    err << msg << "\n";
    return manifest.finish(2, msg);
  }
  if (study.min_order > 0 && rep.min_order < study.min_order) {
    const std::string msg = "observed order " + format_double(rep.min_order) + " below required " +
                            format_double(study.min_order);
    err << msg << "\n";
    return manifest.finish(2, msg);
  }
  return manifest.finish(0, "");
}

int study_decay(const StudyCommand& cmd, const RawConfig& raw, ManifestScope& manifest, std::ostream& out,
                std::ostream& err) {
  SimulationConfig cfg = to_simulation_config(raw);
  Problem problem(cfg);
  struct Point {
    double t, v_l2, theta_l1, g_l2, kinetic;
  };
  std::vector<Point> curve;
  RunOptions opts;
  opts.on_record = [&](const SimulationState&, const DiagnosticsRecord& r) {
    curve.push_back({r.t, r.decay.v_l2, r.decay.theta_l1, r.decay.g_l2, r.kinetic_energy});
  };
  const RunResult res = run(problem, opts);
  {
    CsvWriter csv(manifest.path("decay.csv"), {"t", "v_l2", "theta_l1", "g_l2", "kinetic_energy"});
    manifest.add("decay.csv");
    for (const auto& p : curve) csv.row({p.t, p.v_l2, p.theta_l1, p.g_l2, p.kinetic});
  }
  write_summary(manifest.path("summary.json"), res);
  manifest.add("summary.json");
  if (res.status != RunStatus::Clean) {
    err << "decay run failed: " << res.message << "\n";
    return manifest.finish(exit_code(res.status), res.message);
  }

  // Horizons T_k = t_end 2^{k - levels + 1}; values at the first record at or after each.
  nlohmann::json j;
  j["kind"] = "decay";
  j["initial"] = {{"v_l2", curve.front().v_l2}, {"theta_l1", curve.front().theta_l1}};
  j["final"] = {{"v_l2", curve.back().v_l2}, {"theta_l1", curve.back().theta_l1}, {"g_l2", curve.back().g_l2}};
  j["ratio"] = {{"v_l2", curve.back().v_l2 / std::max(curve.front().v_l2, 1e-300)},
                {"theta_l1", curve.back().theta_l1 / std::max(curve.front().theta_l1, 1e-300)}};
  std::vector<Point> horizon;
  for (int k = 0; k < cmd.levels; ++k) {
    const double T = cfg.t_end * std::ldexp(1.0, k - cmd.levels + 1);
    for (const auto& p : curve)
      if (p.t >= T - 1e-9 * cfg.t_end) {
        horizon.push_back(p);
        break;
      }
  }
  j["horizons"] = nlohmann::json::array();
  for (const auto& p : horizon) j["horizons"].push_back({{"t", p.t}, {"v_l2", p.v_l2}, {"theta_l1", p.theta_l1}});
  // Once a curve is below 1e-12 of its initial value it sits on the roundoff floor, where
  // step-to-step jitter is not a loss of monotonicity.
  auto monotone_after = [&](double Point::*f, double t0) {
    const double floor = 1e-12 * curve.front().*f;
    for (std::size_t k = 1; k < curve.size(); ++k)
      if (curve[k - 1].t >= t0 && curve[k].*f > curve[k - 1].*f && curve[k].*f > floor) return false;
    return true;
  };
  j["roundoff_floor_relative"] = 1e-12;
  j["monotone_after_t1"] = {{"v_l2", monotone_after(&Point::v_l2, 1.0)},
                            {"theta_l1", monotone_after(&Point::theta_l1, 1.0)}};
  {
    std::ofstream o(manifest.path("decay.json"));
    o << j.dump(2) << '\n';
    manifest.add("decay.json");
  }
  out << "decay: ||v||_2 " << format_double(curve.front().v_l2) << " -> " << format_double(curve.back().v_l2)
      << ", ||theta - theta_hat||_1 " << format_double(curve.front().theta_l1) << " -> "
      << format_double(curve.back().theta_l1) << "\n";
  for (std::size_t k = 1; k < horizon.size(); ++k) {
    const auto& a = horizon[k - 1];
    const auto& b = horizon[k];
    if (b.v_l2 > a.v_l2 || b.theta_l1 > a.theta_l1) {
      const std::string msg = "non-monotone decay between horizons t = " + format_double(a.t) + " and t = " +
                              format_double(b.t);
      err << msg << "\n";
      return manifest.finish(2, msg);
    }
  }
  return manifest.finish(0, "");
}

}  // namespace

int cmd_study(const StudyCommand& cmd, std::ostream& out, std::ostream& err) {
  ManifestScope manifest("study " + cmd.kind, cmd.config_path);
  try {
    if (cmd.kind != "refinement" && cmd.kind != "decay")
      throw ConfigError("study kind must be refinement or decay");
    if (cmd.levels < 2) throw ConfigError("a study ladder needs at least two levels (got " +
                                          std::to_string(cmd.levels) + ")");
    const RawConfig raw = load_with_overrides(cmd.config_path, cmd.overrides);
    manifest.set_hash(fnv1a64(raw.canonical()));
    const std::string configured = cmd.out_dir.empty() && raw.has("run.out_dir") ? raw.get("run.out_dir") : cmd.out_dir;
    const std::string dir = resolve_out_dir(configured);
    prepare_dir(dir, {"ladder.csv", "orders.json", "decay.csv", "decay.json", "summary.json", "manifest.json"});
    manifest.set_dir(dir);
    if (cmd.kind == "refinement") return study_refinement(cmd, raw, manifest, out, err);
    return study_decay(cmd, raw, manifest, out, err);
  } catch (const ConfigError& e) {
    err << "usage error: " << e.what() << "\n";
    return manifest.finish(1, e.what());
  } catch (const InvariantBreach& e) {
    err << "invariant breach: " << e.what() << "\n";
    return manifest.finish(2, e.what());
  } catch (const std::exception& e) {
    err << "solver failure: " << e.what() << "\n";
    return manifest.finish(3, e.what());
  }
}

}  // namespace nsf
