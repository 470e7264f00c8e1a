#include "nsf/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "nsf/error.hpp"
#include "nsf/truncation.hpp"

namespace nsf {

namespace {

struct Face {
  int ip, jp, in, jn;
  double ratio;  // face length / node distance
  double kappa;
  double flux;   // volume flux from P to N
};

// Visits every control-volume face, including those touching the boundary ring.
template <class Fn>
void for_each_face(const Grid& g, const FaceField* kf, const FaceField* flux, Fn&& fn) {
  const double rx = g.hy() / g.hx(), ry = g.hx() / g.hy();
  for (int j = 1; j <= g.ny(); ++j)
    for (int i = 0; i <= g.nx(); ++i)
      fn(Face{i, j, i + 1, j, rx, kf ? kf->x(i, j) : 0.0, flux ? flux->x(i, j) : 0.0});
  for (int j = 0; j <= g.ny(); ++j)
    for (int i = 1; i <= g.nx(); ++i)
      fn(Face{i, j, i, j + 1, ry, kf ? kf->y(i, j) : 0.0, flux ? flux->y(i, j) : 0.0});
}

bool is_zero(const std::vector<double>& c) {
  return std::all_of(c.begin(), c.end(), [](double v) { return v == 0.0; });
}

ModeSample velocity_at(const VelocityBasis& basis, std::size_t q, const std::vector<double>& c) {
  ModeSample s;
  for (int j = 0; j < basis.size(); ++j) s.axpy(c[static_cast<std::size_t>(j)], basis.at_quad(q, j));
  return s;
}

// Integral over [a, b] of the linear interpolant of (fa, fb) times w(t); the interval is split
// at `knots` so each piece of a piecewise cubic w is integrated exactly by 3-point Gauss.
template <class W>
double integrate_linear(double a, double b, double fa, double fb, W&& w, const std::vector<double>& knots) {
  if (b <= a) return 0.0;
  static const double gx[3] = {0.5 - 0.5 * std::sqrt(0.6), 0.5, 0.5 + 0.5 * std::sqrt(0.6)};
  static const double gw[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
  std::vector<double> cuts{a};
  for (double k : knots)
    if (k > a && k < b) cuts.push_back(k);
  cuts.push_back(b);
  double total = 0.0;
  for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
    const double lo = cuts[s], hi = cuts[s + 1];
    for (int g = 0; g < 3; ++g) {
      const double t = lo + (hi - lo) * gx[g];
      const double lam = (t - a) / (b - a);
      total += (hi - lo) * gw[g] * ((1.0 - lam) * fa + lam * fb) * w(t);
    }
  }
  return total;
}

std::vector<double> bump_knots(const TestFunction& phi) {
  if (!phi.t) return {};
  const double c = phi.t->center, w = phi.t->width;
  return {c - w, c - 0.5 * w, c, c + 0.5 * w, c + w};
}

// Spatial functionals of one frame against the nodal test field b.
struct SpatialTerms {
  double mass = 0.0;
  double convection = 0.0;
  double diffusion = 0.0;
  double heating = 0.0;
  double production = 0.0;
  double source = 0.0;
};

SpatialTerms spatial_terms(const Problem& problem, const Frame& f, const ScalarField& b,
                           const ScalarField& u, bool entropy) {
  const Grid& g = problem.grid();
  SpatialTerms s;
  const double cv = g.cv_area();
  for (int j = 1; j <= g.ny(); ++j)
    for (int i = 1; i <= g.nx(); ++i) {
      s.mass += cv * u(i, j) * b(i, j);
      const double h = f.heating(i, j);
      s.heating += cv * (entropy ? h / f.theta(i, j) : h) * b(i, j);
    }
  const FaceField kf = problem.face_conductivity(f.theta);
  const bool moving = !is_zero(f.coeffs);
  const FaceField flux = moving ? problem.face_fluxes(f.coeffs) : FaceField(g, 0.0);
  for_each_face(g, &kf, &flux, [&](const Face& e) {
    const double bp = b(e.ip, e.jp), bn = b(e.in, e.jn);
    const double up = u(e.ip, e.jp), un = u(e.in, e.jn);
    if (moving) s.convection += e.flux * (e.flux > 0.0 ? up : un) * (bp - bn);
    if (entropy) {
      // Face forms of kappa grad(theta)/theta and kappa |grad theta|^2/theta^2 whose difference
      // is the temperature flux tested with b/theta (discrete product rule).
      const double tp = f.theta(e.ip, e.jp), tn = f.theta(e.in, e.jn);
      const double d = tn - tp;
      s.diffusion += e.kappa * d * 0.5 * (1.0 / tp + 1.0 / tn) * (bn - bp) * e.ratio;
      s.production += e.kappa * d * d * e.ratio * 0.5 * (bp + bn) / (tp * tn);
    } else {
      s.diffusion += e.kappa * (un - up) * (bn - bp) * e.ratio;
    }
  });
  if (problem.config().mms && !entropy) {
    const ScalarField src = mms_source(problem.config().mms_solution, problem.kappa(), g, f.t);
    for (int j = 1; j <= g.ny(); ++j)
      for (int i = 1; i <= g.nx(); ++i) s.source += cv * src(i, j) * b(i, j);
  }
  return s;
}

WeakResidual balance_residual(const Problem& problem, const Trajectory& traj, const TestFunction& phi,
                              bool entropy, double eta_scale) {
  if (traj.size() < 2) throw std::invalid_argument("weak residual needs at least two records");
  const ScalarField b = phi.spatial(problem.grid());
  std::vector<SpatialTerms> terms;
  terms.reserve(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) {
    if (!entropy) {
      terms.push_back(spatial_terms(problem, traj[k], b, traj[k].theta, false));
      continue;
    }
    ScalarField eta = entropy_field(traj[k].theta);
    if (k > 0 && eta_scale != 1.0)
      for (double& v : eta.values()) v *= eta_scale;
    terms.push_back(spatial_terms(problem, traj[k], b, eta, true));
  }
  const auto knots = bump_knots(phi);
  auto B = [&](double t) { return phi.time_value(t); };
  auto dB = [&](double t) { return phi.time_d1(t); };

  const double ta = traj.front().t, tb = traj.back().t;
  double time = 0.0, conv = 0.0, diff = 0.0, heat = 0.0, prod = 0.0, src = 0.0;
  for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
    const double a = traj[k].t, c = traj[k + 1].t;
    const auto& A = terms[k];
    const auto& C = terms[k + 1];
    // Rothe interpolants of the implicit scheme: the stored quantity is piecewise linear in
    // time, every flux and source is piecewise constant with its value at the step end.
    time -= integrate_linear(a, c, A.mass, C.mass, dB, knots);
    const double wB = integrate_linear(a, c, 1.0, 1.0, B, knots);
    conv += wB * C.convection;
    diff += wB * C.diffusion;
    heat -= wB * C.heating;
    prod -= wB * C.production;
    src -= wB * C.source;
  }
  const double scale = phi.amplitude;
  WeakResidual r;
  r.terms = {{"end", scale * terms.back().mass * B(tb)},
             {"start", -scale * terms.front().mass * B(ta)},
             {"time", scale * time},
             {"convection", scale * conv},
             {"diffusion", scale * diff},
             {"heating", scale * heat}};
  if (entropy) r.terms.emplace_back("production", scale * prod);
  if (problem.config().mms && !entropy) r.terms.emplace_back("source", scale * src);
  r.finish();
  return r;
}

}  // namespace

ScalarField entropy_field(const ScalarField& theta) {
  ScalarField eta = theta;
  for (double& v : eta.values()) {
    if (!(v > 0.0)) throw std::domain_error("entropy needs a positive temperature, found " + std::to_string(v));
    v = std::log(v);
  }
  return eta;
}

ScalarField entropy_production(const Problem& problem, const ScalarField& theta,
                               const ScalarField& heating) {
  const Grid& g = problem.grid();
  ScalarField out(g, 0.0);
  for (int j = 0; j < g.py(); ++j)
    for (int i = 0; i < g.px(); ++i) {
      const double th = theta(i, j);
      if (!(th > 0.0)) throw std::domain_error("entropy production needs a positive temperature");
      const Vec2 gr = nodal_gradient(g, theta, i, j);
      out(i, j) = heating(i, j) / th + problem.kappa()(th) * (gr.x * gr.x + gr.y * gr.y) / (th * th);
    }
  return out;
}

Frame make_frame(const SimulationState& state) {
  return Frame{state.t, state.velocity.coeffs, state.theta, state.heating};
}

double Bump::value(double x) const { return bspline_bump(center, width, x); }
double Bump::d1(double x) const { return bspline_bump_d1(center, width, x); }

ScalarField TestFunction::spatial(const Grid& grid) const {
  if (!(x.width > 0.0 && y.width > 0.0) || x.lo() <= 0.0 || x.hi() >= grid.lx() || y.lo() <= 0.0 ||
      y.hi() >= grid.ly())
    throw std::invalid_argument("test function support must lie strictly inside the domain");
  if (t && !(t->width > 0.0)) throw std::invalid_argument("time bump width must be positive");
  ScalarField b(grid, 0.0);
  for (int j = 1; j <= grid.ny(); ++j)
    for (int i = 1; i <= grid.nx(); ++i) b(i, j) = x.value(grid.x(i)) * y.value(grid.y(j));
  return b;
}

void WeakResidual::finish() {
  residual = 0.0;
  magnitude = 0.0;
  for (const auto& [name, v] : terms) {
    residual += v;
    magnitude += std::abs(v);
  }
  normalized = magnitude > 0.0 ? std::abs(residual) / magnitude : 0.0;
}

WeakResidual weak_residual_momentum(const Problem& problem, const Trajectory& traj, int mode) {
  if (traj.size() < 2) throw std::invalid_argument("weak residual needs at least two records");
  if (mode < 0 || mode >= problem.basis().size()) throw std::out_of_range("test mode out of range");
  const auto j = static_cast<std::size_t>(mode);
  double inc = 0.0, inc_abs = 0.0, rhs = 0.0, rhs_abs = 0.0;
  for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
    const double dt = traj[k + 1].t - traj[k].t;
    const double d = traj[k + 1].coeffs[j] - traj[k].coeffs[j];
    const double f = is_zero(traj[k + 1].coeffs)
                         ? 0.0
                         : dt * momentum_rhs(problem, traj[k + 1].coeffs, traj[k].theta)[j];
    inc += d;
    inc_abs += std::abs(d);
    rhs -= f;
    rhs_abs += std::abs(f);
  }
  WeakResidual r;
  r.terms = {{"increment", inc}, {"rhs", rhs}};
  r.finish();
  // Cancellation between steps must not hide per-step magnitudes.
  r.magnitude = inc_abs + rhs_abs;
  r.normalized = r.magnitude > 0.0 ? std::abs(r.residual) / r.magnitude : 0.0;
  return r;
}

WeakResidual weak_residual_internal_energy(const Problem& problem, const Trajectory& traj,
                                           const TestFunction& phi) {
  return balance_residual(problem, traj, phi, false, 1.0);
}

WeakResidual weak_residual_entropy(const Problem& problem, const Trajectory& traj,
                                   const TestFunction& phi, const EntropyResidualOptions& opts) {
  return balance_residual(problem, traj, phi, true, opts.eta_scale);
}

WeakResidual truncated_energy_identity(const Problem& problem, const Trajectory& traj, double M,
                                       double delta) {
  if (traj.size() < 2) throw std::invalid_argument("identity needs at least two records");
  const Grid& g = problem.grid();
  const double bmax = problem.theta_ring().boundary_max();
  if (!(M > 2.0 * bmax))
    throw std::invalid_argument("truncation level M must exceed twice the maximal boundary temperature");
  if (!(delta > 0.0 && delta < 0.5 * M)) throw std::invalid_argument("need 0 < delta < M/2");
  const MollifiedCutoff T(M, delta);

  auto dissipated = [&](const Frame& f) {
    const FaceField kf = problem.face_conductivity(f.theta);
    double s = 0.0;
    for_each_face(g, &kf, nullptr, [&](const Face& e) {
      // kappa (tn - tp)(T'(tp) - T'(tn)) = kappa |T''(xi)| (tn - tp)^2 for some xi between them.
      const double tp = f.theta(e.ip, e.jp), tn = f.theta(e.in, e.jn);
      s += e.kappa * (tn - tp) * (T.d1(tp) - T.d1(tn)) * e.ratio;
    });
    return s;
  };
  auto excess = [&](const ScalarField& th) {
    double s = 0.0;
    for (int j = 0; j < g.py(); ++j)
      for (int i = 0; i < g.px(); ++i) s += g.nodal_weight(i, j) * (th(i, j) - T.value(th(i, j)));
    return s;
  };
  auto cut_heating = [&](const Frame& f) {
    double s = 0.0;
    for (int j = 1; j <= g.ny(); ++j)
      for (int i = 1; i <= g.nx(); ++i) s += g.cv_area() * (1.0 - T.d1(f.theta(i, j))) * f.heating(i, j);
    return s;
  };

  // Right-endpoint rule, the backward Euler reading of the trajectory.
  double lhs = 0.0, heat = 0.0;
  for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
    const double dt = traj[k + 1].t - traj[k].t;
    lhs += dt * dissipated(traj[k + 1]);
    heat += dt * cut_heating(traj[k + 1]);
  }
  WeakResidual r;
  r.terms = {{"dissipated", lhs},
             {"initial_excess", -excess(traj.front().theta)},
             {"final_excess", excess(traj.back().theta)},
             {"cut_heating", -heat}};
  r.finish();
  return r;
}

// ---------------------------------------------------------------------------

void AprioriExponents::validate() const {
  if (!(r >= 1.0 && r < 5.0 / 3.0)) throw ConfigError("diag.r must lie in [1, 5/3)");
  if (!(s >= 1.0 && s < 5.0 / 4.0)) throw ConfigError("diag.s must lie in [1, 5/4)");
  if (!(alpha > 0.0 && alpha < 0.5)) throw ConfigError("diag.alpha must lie in (0, 1/2)");
  if (!(p > 1.0)) throw ConfigError("stress exponent p must exceed 1");
}

AprioriMonitor::AprioriMonitor(const Problem& problem, AprioriExponents exponents)
    : problem_(&problem), e_(exponents) {
  e_.validate();
}

void AprioriMonitor::start(const std::vector<double>& coeffs) {
  double s = 0.0;
  for (double c : coeffs) s += c * c;
  sup_v2_ = std::max(sup_v2_, std::sqrt(s));
}

void AprioriMonitor::advance(double dt, const std::vector<double>& coeffs, const ScalarField& theta) {
  start(coeffs);
  const Grid& g = problem_->grid();
  const auto& qp = g.quad_points();
  ScalarField theta_a = theta, diff = theta, eta = entropy_field(theta);
  for (double& v : theta_a.values()) v = std::pow(v, e_.alpha);
  const auto& th = problem_->theta_hat();
  for (std::size_t k = 0; k < diff.values().size(); ++k) diff.values()[k] -= th.values()[k];
  const bool moving = !is_zero(coeffs);
  const double q5 = 5.0 * e_.p / 3.0;
  double dv = 0, v5 = 0, tr = 0, ga = 0, gs = 0, e2 = 0, e4 = 0, e8 = 0;
  for (std::size_t q = 0; q < qp.size(); ++q) {
    const double w = qp[q].w;
    if (moving) {
      const ModeSample v = velocity_at(problem_->basis(), q, coeffs);
      dv += w * std::pow(v.sym_gradient().norm(), e_.p);
      v5 += w * std::pow(std::hypot(v.u, v.v), q5);
    }
    tr += w * std::pow(interpolate(theta, qp[q]), e_.r);
    const Vec2 a = interpolate_gradient(g, theta_a, qp[q]);
    ga += w * (a.x * a.x + a.y * a.y);
    const Vec2 d = interpolate_gradient(g, diff, qp[q]);
    gs += w * std::pow(std::hypot(d.x, d.y), e_.s);
    const double et = std::abs(interpolate(eta, qp[q]));
    const double et2 = et * et, et4 = et2 * et2;
    e2 += w * et2;
    e4 += w * et4;
    e8 += w * et4 * et4;
  }
  dv_ += dt * dv;
  v5_ += dt * v5;
  th_ += dt * tr;
  ga_ += dt * ga;
  gs_ += dt * gs;
  eta2_ += dt * e2;
  eta4_ += dt * e4;
  eta8_ += dt * e8;
}

AprioriNorms AprioriMonitor::norms() const {
  AprioriNorms n;
  n.sup_v_l2 = sup_v2_;
  n.dv_lp = std::pow(dv_, 1.0 / e_.p);
  n.v_l5p3 = std::pow(v5_, 3.0 / (5.0 * e_.p));
  n.theta_lr = std::pow(th_, 1.0 / e_.r);
  n.grad_theta_alpha_l2 = std::sqrt(ga_);
  n.grad_theta_ls = std::pow(gs_, 1.0 / e_.s);
  n.eta_l2 = std::sqrt(eta2_);
  n.eta_l4 = std::pow(eta4_, 0.25);
  n.eta_l8 = std::pow(eta8_, 0.125);
  return n;
}

AprioriNorms apriori_norms(const Problem& problem, const Trajectory& traj, const AprioriExponents& e) {
  AprioriMonitor m(problem, e);
  if (traj.empty()) return m.norms();
  m.start(traj.front().coeffs);
  for (std::size_t k = 1; k < traj.size(); ++k)
    m.advance(traj[k].t - traj[k - 1].t, traj[k].coeffs, traj[k].theta);
  return m.norms();
}

DecayMetrics decay_metrics(const Grid& grid, const std::vector<double>& coeffs,
                           const ScalarField& theta, const ScalarField& theta_hat, double M) {
  DecayMetrics d;
  double s = 0.0;
  for (double c : coeffs) s += c * c;
  d.v_l2 = std::sqrt(s);
  double l1 = 0.0, g2 = 0.0;
  for (int j = 0; j < grid.py(); ++j)
    for (int i = 0; i < grid.px(); ++i) {
      const double w = grid.nodal_weight(i, j);
      const double x = theta(i, j) - theta_hat(i, j);
      l1 += w * std::abs(x);
      g2 += w * g_k(M, x);
    }
  d.theta_l1 = l1;
  d.g_l2 = std::sqrt(g2);
  return d;
}

GMetricReport check_g_metric_inequality(const Grid& grid, const ScalarField& theta_hat, double M,
                                        double mu, int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  GMetricReport rep;
  for (int s = 0; s < samples; ++s) {
    const double spread = 0.1 + 5.0 * u(rng);
    double l1 = 0.0, root2 = 0.0, g2 = 0.0;
    for (int j = 0; j < grid.py(); ++j)
      for (int i = 0; i < grid.px(); ++i) {
        const double w = grid.nodal_weight(i, j);
        const double t1 = mu + spread * u(rng), t2 = mu + spread * u(rng);
        const double th = theta_hat(i, j);
        const double dg = g_continuity(M, t1, th) - g_continuity(M, t2, th);
        const double r = std::sqrt(t1) + std::sqrt(t2);
        l1 += w * std::abs(t1 - t2);
        root2 += w * r * r;
        g2 += w * dg * dg;
      }
    const double rhs = std::sqrt(2.0) * std::sqrt(root2) * std::sqrt(g2);
    const double ratio = rhs > 0.0 ? l1 / rhs : (l1 > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    rep.worst_ratio = std::max(rep.worst_ratio, ratio);
    if (l1 > rhs * (1.0 + 1e-12)) ++rep.violations;
    ++rep.samples;
  }
  return rep;
}

// ---------------------------------------------------------------------------

std::vector<std::string> record_columns() {
  return {"t",
          "kinetic_energy",
          "dissipation",
          "internal_energy",
          "entropy",
          "entropy_production_min",
          "min_theta_margin",
          "energy_residual",
          "internal_energy_residual",
          "entropy_residual",
          "apriori_sup_v_l2",
          "apriori_dv_lp",
          "apriori_v_l5p3",
          "apriori_theta_lr",
          "apriori_grad_theta_alpha_l2",
          "apriori_grad_theta_ls",
          "decay_v_l2",
          "decay_theta_l1",
          "decay_g_l2",
          "eta_l2",
          "eta_l4",
          "eta_l8",
          "chain_rule_defect",
          "divergence_defect",
          "min_principle_slack",
          "state_drift",
          "jensen_gap",
          "picard_iterations",
          "step"};
}

std::vector<double> record_values(const DiagnosticsRecord& r) {
  const auto& a = r.apriori;
  return {r.t,
          r.kinetic_energy,
          r.dissipation,
          r.internal_energy,
          r.entropy,
          r.entropy_production_min,
          r.min_theta_margin,
          r.energy_residual,
          r.internal_energy_residual,
          r.entropy_residual,
          a.sup_v_l2,
          a.dv_lp,
          a.v_l5p3,
          a.theta_lr,
          a.grad_theta_alpha_l2,
          a.grad_theta_ls,
          r.decay.v_l2,
          r.decay.theta_l1,
          r.decay.g_l2,
          a.eta_l2,
          a.eta_l4,
          a.eta_l8,
          r.chain_rule_defect,
          r.divergence_defect,
          r.min_principle_slack,
          r.state_drift,
          r.jensen_gap,
          static_cast<double>(r.picard_iterations),
          static_cast<double>(r.step)};
}

void StepWindow::add(const StepReport& s) {
  max_energy_defect = std::max(max_energy_defect, std::abs(s.energy_defect));
  max_internal_energy_residual = std::max(max_internal_energy_residual, s.internal_energy_residual);
  max_divergence_defect = std::max(max_divergence_defect, s.divergence_defect);
  max_picard_iterations = std::max(max_picard_iterations, s.picard_iterations);
}

double chain_rule_defect(const Grid& grid, const ScalarField& theta) {
  double worst = 0.0;
  for_each_face(grid, nullptr, nullptr, [&](const Face& e) {
    const double tp = theta(e.ip, e.jp), tn = theta(e.in, e.jn);
    const double h = e.ip != e.in ? grid.hx() : grid.hy();
    const double d = (std::log(tn) - std::log(tp)) - (tn - tp) / (0.5 * (tp + tn));
    worst = std::max(worst, std::abs(d) / h);
  });
  return worst;
}

namespace {

AprioriExponents exponents_of(const Problem& problem) {
  const auto& cfg = problem.config();
  return {problem.stress().p(), cfg.diag_r, cfg.diag_s, cfg.diag_alpha};
}

}  // namespace

RecordBuilder::RecordBuilder(const Problem& problem, const SimulationState& initial)
    : problem_(&problem),
      bump_(TestFunction{}.spatial(problem.grid())),
      apriori_(problem, exponents_of(problem)),
      c0_(initial.velocity.coeffs),
      theta0_(initial.theta) {
  apriori_.start(initial.velocity.coeffs);
  prev_ = entropy_functionals(initial);
}

RecordBuilder::Functionals RecordBuilder::entropy_functionals(const SimulationState& state) const {
  const Frame f = make_frame(state);
  const ScalarField eta = entropy_field(state.theta);
  const SpatialTerms s = spatial_terms(*problem_, f, bump_, eta, true);
  Functionals out;
  out.t = state.t;
  out.mass = s.mass;
  out.flux = s.convection + s.diffusion - s.heating - s.production;
  out.abs_flux = std::abs(s.convection) + std::abs(s.diffusion) + std::abs(s.heating) + std::abs(s.production);
  return out;
}

DiagnosticsRecord RecordBuilder::base_record(const SimulationState& state) const {
  const Problem& pb = *problem_;
  const Grid& g = pb.grid();
  DiagnosticsRecord r;
  r.t = state.t;
  r.step = state.step;
  r.kinetic_energy = state.velocity.kinetic_energy();
  r.dissipation = is_zero(state.velocity.coeffs) ? 0.0 : dissipation(pb, state.velocity.coeffs, state.theta);
  r.internal_energy = integrate_nodal(g, state.theta);
  const ScalarField eta = entropy_field(state.theta);
  r.entropy = integrate_nodal(g, eta);
  r.entropy_production_min = entropy_production(pb, state.theta, state.heating).min();
  r.min_theta_margin = state.theta.min() - pb.mu();
  r.apriori = apriori_.norms();
  r.decay = decay_metrics(g, state.velocity.coeffs, state.theta, pb.theta_hat(), pb.config().diag_M);
  r.chain_rule_defect = chain_rule_defect(g, state.theta);
  double drift = 0.0;
  for (std::size_t j = 0; j < c0_.size(); ++j) drift = std::max(drift, std::abs(state.velocity.coeffs[j] - c0_[j]));
  for (std::size_t k = 0; k < theta0_.values().size(); ++k)
    drift = std::max(drift, std::abs(state.theta.values()[k] - theta0_.values()[k]));
  r.state_drift = drift;
  r.jensen_gap = std::log(r.internal_energy / g.area()) * g.area() - r.entropy;
  return r;
}

void RecordBuilder::step(const SimulationState& state, double dt) {
  apriori_.advance(dt, state.velocity.coeffs, state.theta);
  window_.add(state.last);
}

DiagnosticsRecord RecordBuilder::record(const SimulationState& state, double slack) {
  DiagnosticsRecord r = base_record(state);
  r.energy_residual = window_.max_energy_defect;
  r.internal_energy_residual = window_.max_internal_energy_residual;
  r.divergence_defect = window_.max_divergence_defect;
  r.picard_iterations = window_.max_picard_iterations;
  r.min_principle_slack = slack;
  if (state.t > prev_.t) {
    const Functionals cur = entropy_functionals(state);
    const double half = 0.5 * (cur.t - prev_.t);
    const double res = cur.mass - prev_.mass + half * (cur.flux + prev_.flux);
    const double mag = std::abs(cur.mass) + std::abs(prev_.mass) + half * (cur.abs_flux + prev_.abs_flux);
    r.entropy_residual = mag > 0.0 ? std::abs(res) / mag : 0.0;
    prev_ = cur;
  }
  window_ = StepWindow{};
  return r;
}

}  // namespace nsf
