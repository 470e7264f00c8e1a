// Acceptance report: one PASS/FAIL line per criterion.
//
//   nsf_acceptance <configs-dir> [criterion ...]
//
// With no criterion numbers every criterion runs. Exit status is 0 only when all
// selected criteria pass.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "nsf/commands.hpp"
#include "nsf/config.hpp"
#include "nsf/diagnostics.hpp"
#include "nsf/equilibrium.hpp"
#include "nsf/run.hpp"
#include "nsf/truncation.hpp"
#include "nsf/verify.hpp"

namespace fs = std::filesystem;
using namespace nsf;

namespace {

std::string configs_dir;

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

RawConfig load(const std::string& name, const std::vector<std::string>& overrides = {}) {
  RawConfig raw = load_config(configs_dir + "/" + name);
  for (const auto& o : overrides) apply_override(raw, o);
  return raw;
}

Outcome check_runtime(Outcome o, double seconds, double limit) {
  o.detail += "; " + fmt(seconds) + " s (limit " + fmt(limit) + " s)";
  if (seconds > limit) o.passed = false;
  return o;
}

// ---------------------------------------------------------------------------

Outcome stationary_fixed_point() {
  Outcome o{true, ""};
  for (const char* kappa : {"constant", "rational"}) {
    SimulationConfig cfg = to_simulation_config(load("stationary.cfg", {std::string("kappa.profile=") + kappa}));
    cfg.record_every = 1;
    if (cfg.nx != 32 || cfg.ny != 32 || cfg.n_modes != 6 || cfg.dt != 1e-2 ||
        std::lround(cfg.t_end / cfg.dt) != 200)
      return {false, "stationary.cfg is not the 32x32, 6-mode, 200 x 0.01 setup"};
    const RunResult r = run(cfg);
    if (r.status != RunStatus::Clean) return {false, std::string(kappa) + ": " + r.message};
    double worst = 0.0;
    for (const auto& rec : r.records)
      worst = std::max({worst, std::abs(rec.energy_residual), std::abs(rec.internal_energy_residual),
                        std::abs(rec.entropy_residual), std::abs(rec.state_drift)});
    o.detail += std::string(o.detail.empty() ? "" : ", ") + kappa + " kappa worst " + fmt(worst);
    if (!(worst <= 1e-8)) o.passed = false;
  }
  o.detail += " (limit 1e-8)";
  return o;
}

// Ten randomized prototype-law runs shared by the minimum principle, the kinetic energy and the
// entropy production criteria.
struct RandomRun {
  RunResult result;
  double mu = 0.0;
  double min_margin = 0.0;  // min over steps of min theta - mu
  double slack = 0.0;       // accumulated roundoff slack at the end
};

const std::vector<RandomRun>& random_runs() {
  static std::vector<RandomRun> runs = [] {
    std::vector<RandomRun> out;
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> side(1.0, 3.0), amp(0.2, 1.0), bump(-0.5, 1.0), pos(0.35, 0.65);
    std::uniform_int_distribution<int> mode(1, 6);
    for (int k = 0; k < 10; ++k) {
      SimulationConfig cfg;
      cfg.nx = cfg.ny = 48;
      cfg.n_modes = 6;
      cfg.p = 2.2;
      cfg.kappa_profile = "rational";
      cfg.kappa_lo = 1.0;
      cfg.kappa_hi = 2.0;
      auto random_side = [&] {
        const double a = side(rng), b = side(rng);
        return SideData{a, b - a};
      };
      cfg.theta_b.left = random_side();
      cfg.theta_b.right = random_side();
      cfg.theta_b.bottom = random_side();
      cfg.theta_b.top = random_side();
      cfg.v0.kind = VelocitySpec::Kind::Mode;
      cfg.v0.mode = mode(rng);
      cfg.v0.amplitude = amp(rng);
      cfg.theta0.kind = TemperatureSpec::Kind::Bump;
      cfg.theta0.bump_amplitude = bump(rng);
      cfg.theta0.bump_cx = pos(rng);
      cfg.theta0.bump_cy = pos(rng);
      cfg.theta0.bump_width = 0.3;
      cfg.dt = 0.01;
      cfg.t_end = 0.5;
      cfg.record_every = 1;
      cfg.write_snapshots = false;
      cfg.seed = static_cast<std::uint64_t>(k + 1);

      RandomRun rr;
      rr.min_margin = std::numeric_limits<double>::infinity();
      RunOptions opts;
      opts.on_record = [&](const SimulationState&, const DiagnosticsRecord& rec) {
        rr.min_margin = std::min(rr.min_margin, rec.min_theta_margin);
        rr.slack = rec.min_principle_slack;
      };
      rr.result = run(cfg, opts);
      rr.mu = rr.result.mu;
      out.push_back(std::move(rr));
    }
    return out;
  }();
  return runs;
}

Outcome minimum_principle() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto& runs = random_runs();
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  Outcome o{true, ""};
  double worst_margin = std::numeric_limits<double>::infinity(), worst_slack = 0.0;
  for (const auto& r : runs) {
    if (r.result.status != RunStatus::Clean) return {false, r.result.message};
    worst_margin = std::min(worst_margin, (r.min_margin + r.slack) / r.mu);
    worst_slack = std::max(worst_slack, r.slack / r.mu);
    if (r.min_margin < -r.slack || r.slack > 1e-3 * r.mu) o.passed = false;
  }
  o.detail = "10 runs, min (theta - mu + slack)/mu " + fmt(worst_margin) + " (limit 0), max slack/mu " +
             fmt(worst_slack) + " (limit 1e-3)";
  // The runs are cached; time them once, here.
  return check_runtime(o, secs, 300.0);
}

Outcome kinetic_energy_dissipation() {
  Outcome o{true, ""};
  double rise = -std::numeric_limits<double>::infinity(), defect = 0.0;
  for (const auto& r : random_runs()) {
    if (r.result.status != RunStatus::Clean) return {false, r.result.message};
    const auto& ke = r.result.invariants.at("kinetic_energy_nonincreasing");
    const auto& id = r.result.invariants.at("energy_identity");
    rise = std::max(rise, ke.worst);
    defect = std::max(defect, id.worst);
    if (!(ke.worst <= 0.0) || !(id.worst <= 1e-9)) o.passed = false;
  }
  o.detail = "max per-step energy increase " + fmt(rise) + " (limit 0), max defect/(1+|c|^3) " + fmt(defect) +
             " (limit 1e-9)";
  return o;
}

Outcome entropy_production_sign() {
  Outcome o{true, ""};
  double worst = 0.0;
  std::size_t records = 0;
  for (const auto& r : random_runs()) {
    if (r.result.status != RunStatus::Clean) return {false, r.result.message};
    const auto& c = r.result.invariants.at("entropy_production_nonnegative");
    worst = std::max(worst, c.worst);
    records += r.result.records.size();
    if (!(c.worst <= 1e-12)) o.passed = false;
  }
  o.detail = std::to_string(records) + " records, max -min(production)/scale " + fmt(worst) + " (limit 1e-12)";
  return o;
}

Outcome constitutive_suites() {
  const auto t0 = std::chrono::steady_clock::now();
  VerifyOptions opts;
  opts.samples = 10000;
  const auto rows = verify_scope("laws", opts);
  opts.inject_broken_law = true;
  const auto broken = verify_scope("laws", opts);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  int failed = 0;
  for (const auto& r : rows) failed += !r.passed;
  int broken_failed = 0;
  for (const auto& r : broken) broken_failed += !r.passed;
  Outcome o{failed == 0 && broken_failed > 0,
            std::to_string(rows.size()) + " checks, " + std::to_string(failed) + " failed; injected law fails " +
                std::to_string(broken_failed) + " checks (need > 0)"};
  return check_runtime(o, secs, 10.0);
}

Outcome truncation_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto rows = verify_scope("truncation", {});
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  int failed = 0;
  double round_trip = 0.0;
  for (const auto& r : rows) {
    failed += !r.passed;
    if (r.check.rfind("Kirchhoff round trip", 0) == 0) round_trip = std::max(round_trip, r.value);
  }
  Outcome o{failed == 0 && round_trip <= 1e-10, std::to_string(rows.size()) + " checks, " +
                                                    std::to_string(failed) + " failed; Kirchhoff round trip " +
                                                    fmt(round_trip) + " (limit 1e-10)"};
  return check_runtime(o, secs, 10.0);
}

Outcome equilibrium_solver() {
  const Grid grid(32, 32);
  Outcome o{true, ""};

  EquilibriumProblem lin;
  lin.grid = &grid;
  lin.law = ConductivityLaw::constant(1.0);
  lin.boundary = {SideData{1, 0}, SideData{2, 0}, SideData{1, 1}, SideData{1, 1}};
  const auto a = solve_theta_hat(lin);
  double lin_err = 0.0;
  for (int j = 0; j <= grid.ny() + 1; ++j)
    for (int i = 0; i <= grid.nx() + 1; ++i)
      lin_err = std::max(lin_err, std::abs(a.theta_hat(i, j) - (1.0 + grid.x(i))));
  if (!(lin_err <= 1e-10)) o.passed = false;

  // Kirchhoff linearity: K(theta_hat) must be discrete-harmonic; checked with a fresh stencil.
  EquilibriumProblem rat = lin;
  rat.law = ConductivityLaw::rational(1.0, 2.0);
  rat.boundary = {SideData{1, 0}, SideData{3, 0}, SideData{1, 2}, SideData{1, 2}};
  const auto b = solve_theta_hat(rat);
  double kmax = 1.0, lap = 0.0;
  auto K = [&](int i, int j) { return kirchhoff(rat.law, b.theta_hat(i, j), 1.0); };
  for (int j = 0; j <= grid.ny() + 1; ++j)
    for (int i = 0; i <= grid.nx() + 1; ++i) kmax = std::max(kmax, std::abs(K(i, j)));
  for (int j = 1; j <= grid.ny(); ++j)
    for (int i = 1; i <= grid.nx(); ++i)
      lap = std::max(lap, std::abs(K(i + 1, j) + K(i - 1, j) + K(i, j + 1) + K(i, j - 1) - 4 * K(i, j)));
  const double kirch = lap / kmax;
  if (!(kirch <= 1e-8)) o.passed = false;

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> side(0.5, 4.0), lo(0.1, 2.0), span(0.0, 5.0);
  int violations = 0;
  for (int d = 0; d < 20; ++d) {
    EquilibriumProblem pb;
    pb.grid = &grid;
    const double l = lo(rng);
    pb.law = ConductivityLaw::rational(l, l + span(rng));
    auto random_side = [&] {
      const double x = side(rng), y = side(rng);
      return SideData{x, y - x};
    };
    pb.boundary = {random_side(), random_side(), random_side(), random_side()};
    const auto s = solve_theta_hat(pb);
    const double bmin = s.theta_hat.boundary_min(), bmax = s.theta_hat.boundary_max();
    const double tol = 1e-12 * bmax;
    if (s.theta_hat.min() < bmin - tol || s.theta_hat.max() > bmax + tol) ++violations;
  }
  if (violations) o.passed = false;
  o.detail = "linear profile error " + fmt(lin_err) + " (limit 1e-10), Kirchhoff linearity " + fmt(kirch) +
             " (limit 1e-8), maximum principle violations " + std::to_string(violations) + "/20";
  return o;
}

// Runs `nsf study --kind refinement` through the library and reads the emitted report.
nlohmann::json study_report(const std::string& config, int levels) {
  StudyCommand cmd;
  cmd.kind = "refinement";
  cmd.config_path = configs_dir + "/" + config;
  cmd.levels = levels;
  cmd.out_dir = (fs::temp_directory_path() / ("nsf_acceptance_" + fs::path(config).stem().string())).string();
  std::ostringstream out, err;
  const int code = cmd_study(cmd, out, err);
  nlohmann::json j;
  std::ifstream in(cmd.out_dir + "/orders.json");
  if (in) in >> j;
  j["exit_status"] = code;
  j["stderr"] = err.str();
  return j;
}

std::string orders_text(const nlohmann::json& j) {
  std::string s;
  for (const auto& v : j["orders"]) s += (s.empty() ? "" : ", ") + fmt(v.get<double>());
  return s;
}

double min_of(const nlohmann::json& a) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& v : a) m = std::min(m, v.get<double>());
  return m;
}

Outcome mms_refinement() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto space = study_report("mms_space.cfg", 3);
  const auto time = study_report("mms_time.cfg", 3);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!space.contains("orders") || !time.contains("orders")) return {false, "study report missing"};
  const double so = min_of(space["orders"]), to = min_of(time["orders"]);
  Outcome o{space["monotone"].get<bool>() && time["monotone"].get<bool>() && so >= 1.8 && to >= 0.9,
            "space orders " + orders_text(space) + " (need >= 1.8), time orders " + orders_text(time) +
                " (need >= 0.9)"};
  return check_runtime(o, secs, 300.0);
}

Outcome entropy_equality() {
  const auto j = study_report("entropy_ladder.cfg", 3);
  if (!j.contains("orders")) return {false, "study report missing: " + j["stderr"].get<std::string>()};
  const double order = min_of(j["orders"]);
  const double detector = j["min_detector_ratio"].get<double>();
  std::string errs;
  for (const auto& v : j["errors"]) errs += (errs.empty() ? "" : " -> ") + fmt(v.get<double>());
  return {j["monotone"].get<bool>() && order >= 0.9 && detector >= 5.0,
          "residual " + errs + ", orders " + orders_text(j) + " (need >= 0.9), detector ratio >= " + fmt(detector) +
              " (need >= 5)"};
}

Outcome stability_decay() {
  const auto t0 = std::chrono::steady_clock::now();
  SimulationConfig cfg = to_simulation_config(load("decay.cfg"));
  if (cfg.nx != 48 || cfg.ny != 48 || cfg.t_end != 50.0 || cfg.v0.kind != VelocitySpec::Kind::Mode)
    return {false, "decay.cfg is not the 48x48, T = 50, single-mode setup"};
  std::vector<std::array<double, 3>> curve;
  RunOptions opts;
  opts.on_record = [&](const SimulationState&, const DiagnosticsRecord& r) {
    curve.push_back({r.t, r.decay.v_l2, r.decay.theta_l1});
  };
  const RunResult res = run(cfg, opts);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (res.status != RunStatus::Clean) return {false, res.message};
  const double rv = curve.back()[1] / curve.front()[1];
  const double rt = curve.back()[2] / curve.front()[2];
  // Below 1e-12 of the initial value a curve sits on the roundoff floor.
  auto monotone = [&](int f) {
    const double floor = 1e-12 * curve.front()[f];
    for (std::size_t k = 1; k < curve.size(); ++k)
      if (curve[k - 1][0] >= 1.0 && curve[k][f] > curve[k - 1][f] && curve[k][f] > floor) return false;
    return true;
  };
  const bool mv = monotone(1), mt = monotone(2);
  Outcome o{rv <= 1e-6 && rt <= 1e-3 && mv && mt,
            "||v|| ratio " + fmt(rv) + " (limit 1e-6), ||theta - theta_hat||_1 ratio " + fmt(rt) +
                " (limit 1e-3), monotone after t = 1: " + (mv ? "yes" : "no") + "/" + (mt ? "yes" : "no")};
  return check_runtime(o, secs, 600.0);
}

Outcome truncated_identity() {
  Outcome o{true, ""};
  // On the entropy-ladder runs M is above every temperature, T is the identity on the range
  // and the identity must hold exactly.
  {
    const RawConfig raw = load("entropy_ladder.cfg");
    const SimulationConfig base = to_simulation_config(raw);
    double worst = 0.0, theta_max = 0.0;
    for (int k = 0; k < 3; ++k) {
      SimulationConfig cfg = base;
      cfg.nx = (base.nx + 1) * (1 << k) - 1;
      cfg.ny = (base.ny + 1) * (1 << k) - 1;
      cfg.dt = base.dt / (1 << k);
      cfg.record_every = std::numeric_limits<int>::max() / 2;
      Problem problem(cfg);
      RunOptions opts;
      opts.keep_trajectory = true;
      const RunResult r = run(problem, opts);
      if (r.status != RunStatus::Clean) return {false, r.message};
      for (const auto& f : r.trajectory) theta_max = std::max(theta_max, f.theta.max());
      const double M = 10.0;
      const auto w = truncated_energy_identity(problem, r.trajectory, M, 0.5);
      worst = std::max(worst, std::abs(w.residual));
    }
    if (!(worst <= 1e-12) || theta_max >= 10.0 - 0.5) o.passed = false;
    o.detail = "M = 10 above max theta " + fmt(theta_max) + ": residual " + fmt(worst) + " (limit 1e-12)";
  }
  // Hot spot crossing M: the residual is a discretization error, bounded by 10 dt per rung.
  {
    const auto j = study_report("truncated_ladder.cfg", 3);
    if (!j.contains("errors")) return {false, "study report missing: " + j["stderr"].get<std::string>()};
    const RawConfig raw = load("truncated_ladder.cfg");
    const double dt0 = to_simulation_config(raw).dt;
    std::string errs;
    int k = 0;
    for (const auto& v : j["errors"]) {
      const double e = v.get<double>();
      const double tol = 10.0 * dt0 / (1 << k);
      errs += (errs.empty() ? "" : ", ") + fmt(e) + " <= " + fmt(tol);
      if (!(e <= tol)) o.passed = false;
      ++k;
    }
    if (!j["monotone"].get<bool>()) o.passed = false;
    o.detail += "; M = 3.5 inside the range: " + errs;
  }
  return o;
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> fn;
};

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: nsf_acceptance <configs-dir> [criterion ...]\n";
    return 1;
  }
  configs_dir = argv[1];
  const std::vector<Criterion> all = {
      {1, "stationary fixed point", stationary_fixed_point},
      {2, "minimum principle", minimum_principle},
      {3, "discrete kinetic-energy dissipation", kinetic_energy_dissipation},
      {4, "entropy production nonnegativity", entropy_production_sign},
      {5, "constitutive assumption suites", constitutive_suites},
      {6, "truncation suite", truncation_suite},
      {7, "equilibrium solver", equilibrium_solver},
      {8, "manufactured-solution refinement", mms_refinement},
      {9, "entropy-equality residual", entropy_equality},
      {10, "return to equilibrium", stability_decay},
      {11, "truncated-energy identity", truncated_identity},
  };
  std::vector<int> selected;
  for (int a = 2; a < argc; ++a) selected.push_back(std::stoi(argv[a]));

  bool ok = true;
  for (const auto& c : all) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    ok = ok && o.passed;
    std::printf("[%2d] %s  %-36s %s  (%.1f s)\n", c.id, o.passed ? "PASS" : "FAIL", c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return ok ? 0 : 1;
}
