#include "nsf/run.hpp"

#include <cmath>
#include <sstream>

#include "nsf/error.hpp"

namespace nsf {

namespace {

void track(InvariantCheck& c, double value, double limit) {
  c.limit = limit;
  c.worst = std::max(c.worst, value);
  if (value > limit) c.passed = false;
}

bool finite_state(const SimulationState& s) {
  for (double c : s.velocity.coeffs)
    if (!std::isfinite(c)) return false;
  return s.theta.all_finite();
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

bool monotone(const AprioriNorms& a, const AprioriNorms& b) {
  return b.sup_v_l2 >= a.sup_v_l2 && b.dv_lp >= a.dv_lp && b.v_l5p3 >= a.v_l5p3 && b.theta_lr >= a.theta_lr &&
         b.grad_theta_alpha_l2 >= a.grad_theta_alpha_l2 && b.grad_theta_ls >= a.grad_theta_ls &&
         b.eta_l2 >= a.eta_l2 && b.eta_l4 >= a.eta_l4 && b.eta_l8 >= a.eta_l8;
}

}  // namespace

int exit_code(RunStatus status) { return static_cast<int>(status); }

RunResult run(Problem& problem, const RunOptions& options) {
  RunResult res;
  auto& inv = res.invariants;
  for (const char* name : {"minimum_principle", "kinetic_energy_nonincreasing", "energy_identity",
                           "internal_energy_balance", "heating_consistency", "entropy_production_nonnegative",
                           "jensen", "apriori_monotone", "finite_state"})
    inv[name] = InvariantCheck{};
  try {
    const auto& cfg = problem.config();
    SimulationState state = initial_state(problem);
    res.mu = problem.mu();
    const double mu = problem.mu();
    const bool prototype = problem.stress().coercivity_offset() == 0.0;
    const long n = static_cast<long>(std::ceil(cfg.t_end / cfg.dt - 1e-9));
    RecordBuilder builder(problem, state);
    double slack = 0.0;
    const Grid& g = problem.grid();

    auto emit = [&](const SimulationState& s) {
      DiagnosticsRecord r = builder.record(s, slack);
      if (prototype) {
        const double scale = std::max(1.0, entropy_production(problem, s.theta, s.heating).max());
        track(inv["entropy_production_nonnegative"], -r.entropy_production_min / scale, 1e-12);
        if (r.entropy_production_min < -1e-12 * scale)
          throw InvariantBreach("entropy production nonnegativity", s.step,
                                "min " + fmt(r.entropy_production_min));
      }
      track(inv["jensen"], -r.jensen_gap / std::max(1.0, std::abs(r.entropy)), 1e-12);
      if (!res.records.empty()) {
        const bool ok = monotone(res.records.back().apriori, r.apriori);
        track(inv["apriori_monotone"], ok ? 0.0 : 1.0, 0.0);
      }
      res.records.push_back(r);
      if (options.on_record) options.on_record(s, r);
    };

    emit(state);
    if (options.keep_trajectory) res.trajectory.push_back(make_frame(state));

    for (long step = 1; step <= n; ++step) {
      const double e_old = state.velocity.kinetic_energy();
      state = coupled_step(problem, state, cfg.dt);
      state.t = static_cast<double>(step) * cfg.dt;  // no accumulated drift
      state.velocity.t = state.t;
      res.steps = static_cast<int>(step);
      if (!finite_state(state)) {
        track(inv["finite_state"], 1.0, 0.0);
        throw InvariantBreach("finite state", step, "non-finite coefficient or temperature");
      }
      slack += state.last.min_principle_slack;
      if (!cfg.mms) {
        const double margin = state.theta.min() - mu;
        track(inv["minimum_principle"], -margin - slack, 0.0);
        if (margin < -slack)
          throw InvariantBreach("minimum principle", step,
                                "min theta " + fmt(state.theta.min()) + " < mu - slack = " + fmt(mu - slack));
      }
      double heat_total = 0.0;
      for (int j = 1; j <= g.ny(); ++j)
        for (int i = 1; i <= g.nx(); ++i) heat_total += g.cv_area() * state.heating(i, j);
      const double heat_gap = std::abs(heat_total - state.last.dissipation) / (1.0 + state.last.dissipation);
      track(inv["heating_consistency"], heat_gap, 1e-11);
      if (heat_gap > 1e-11)
        throw InvariantBreach("heating-dissipation consistency", step, "relative gap " + fmt(heat_gap));
      const double cnorm = state.velocity.l2_norm();
      if (prototype) track(inv["kinetic_energy_nonincreasing"], state.velocity.kinetic_energy() - e_old, 0.0);
      track(inv["energy_identity"], std::abs(state.last.energy_defect) / (1.0 + cnorm * cnorm * cnorm), 1e-9);
      track(inv["internal_energy_balance"], state.last.internal_energy_residual, 1e-9);

      builder.step(state, cfg.dt);
      if (options.keep_trajectory) res.trajectory.push_back(make_frame(state));
      if (step % cfg.record_every == 0 || step == n) emit(state);
    }
    res.final_state = std::move(state);
  } catch (const InvariantBreach& e) {
    res.status = RunStatus::InvariantBreach;
    res.message = e.what();
    res.failed_invariant = e.invariant();
    res.failed_step = e.step();
  } catch (const ConfigError& e) {
    res.status = RunStatus::ConfigFailure;
    res.message = e.what();
  } catch (const std::exception& e) {
    res.status = RunStatus::SolverFailure;
    res.message = e.what();
  }
  return res;
}

RunResult run(const SimulationConfig& config, const RunOptions& options) {
  try {
    Problem problem(config);
    return run(problem, options);
  } catch (const ConfigError& e) {
    RunResult r;
    r.status = RunStatus::ConfigFailure;
    r.message = e.what();
    return r;
  } catch (const InvariantBreach& e) {
    RunResult r;
    r.status = RunStatus::InvariantBreach;
    r.message = e.what();
    r.failed_invariant = e.invariant();
    r.failed_step = e.step();
    return r;
  } catch (const std::exception& e) {
    RunResult r;
    r.status = RunStatus::SolverFailure;
    r.message = e.what();
    return r;
  }
}

}  // namespace nsf
