#include "nsf/solver.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Dense>
#include <Eigen/SparseLU>

#include "nsf/error.hpp"

namespace nsf {

namespace {

constexpr double kPi = std::numbers::pi;

// Cardinal cubic B-spline, support [-2, 2].
double cubic_bspline(double u) {
  const double a = std::abs(u);
  if (a >= 2.0) return 0.0;
  if (a >= 1.0) {
    const double r = 2.0 - a;
    return r * r * r / 6.0;
  }
  return (4.0 - 6.0 * a * a + 3.0 * a * a * a) / 6.0;
}

double cubic_bspline_d1(double u) {
  const double a = std::abs(u);
  const double sign = u < 0.0 ? -1.0 : 1.0;
  if (a >= 2.0) return 0.0;
  if (a >= 1.0) {
    const double r = 2.0 - a;
    return -sign * 0.5 * r * r;
  }
  return sign * (-2.0 * a + 1.5 * a * a);
}

}  // namespace

double bspline_bump(double center, double width, double x) {
  // Support center +- width, peak 1 at the center.
  return 1.5 * cubic_bspline(2.0 * (x - center) / width);
}

double bspline_bump_d1(double center, double width, double x) {
  return 1.5 * cubic_bspline_d1(2.0 * (x - center) / width) * 2.0 / width;
}

std::function<Vec2(double, double)> polynomial_vortex(double amplitude, double lx, double ly) {
  // psi = A f(x) g(y), f = (x (lx - x))^2 / (lx/2)^4 so max f = 1.
  return [=](double x, double y) {
    const double sx = 16.0 / std::pow(lx, 4), sy = 16.0 / std::pow(ly, 4);
    const double fx = sx * x * x * (lx - x) * (lx - x);
    const double fx1 = sx * 2.0 * x * (lx - x) * (lx - 2.0 * x);
    const double fy = sy * y * y * (ly - y) * (ly - y);
    const double fy1 = sy * 2.0 * y * (ly - y) * (ly - 2.0 * y);
    return Vec2{amplitude * fx * fy1, -amplitude * fx1 * fy};
  };
}

// ---------------------------------------------------------------------------

double ManufacturedSolution::value(double t, double x, double y) const {
  return base + amplitude * std::exp(-decay * t) * std::sin(kPi * x / lx) * std::sin(kPi * y / ly);
}

double ManufacturedSolution::time_derivative(double t, double x, double y) const {
  return -decay * amplitude * std::exp(-decay * t) * std::sin(kPi * x / lx) * std::sin(kPi * y / ly);
}

Vec2 ManufacturedSolution::gradient(double t, double x, double y) const {
  const double e = amplitude * std::exp(-decay * t);
  const double a = kPi / lx, b = kPi / ly;
  return {e * a * std::cos(a * x) * std::sin(b * y), e * b * std::sin(a * x) * std::cos(b * y)};
}

double ManufacturedSolution::laplacian(double t, double x, double y) const {
  const double a = kPi / lx, b = kPi / ly;
  return -(a * a + b * b) * amplitude * std::exp(-decay * t) * std::sin(a * x) * std::sin(b * y);
}

// ---------------------------------------------------------------------------

void SimulationConfig::validate() const {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  require(nx >= 2 && ny >= 2, "grid.nx and grid.ny must be at least 2");
  require(lx > 0.0 && ly > 0.0, "grid.Lx and grid.Ly must be positive");
  require(quad_order >= 1 && quad_order <= 12, "quad.order must be in [1, 12]");
  require(n_modes >= 1, "basis.n_modes must be at least 1");
  require(p > 1.0, "stress.p must exceed 1");
  require(eps_d >= 0.0, "stress.eps_d must be nonnegative");
  require(dt > 0.0, "run.dt must be positive");
  require(t_end >= dt, "run.t_end must be at least run.dt");
  require(record_every >= 1, "run.record_every must be at least 1");
  require(coupling_sweeps >= 1, "run.coupling_sweeps must be at least 1");
  require(picard_max_iters >= 1, "picard.max_iters must be at least 1");
  require(picard_tol > 0.0, "picard.tol must be positive");
  require(picard_damping > 0.0 && picard_damping <= 1.0, "picard.damping must lie in (0, 1]");
  require(eq_tol > 0.0, "eq.tol must be positive");
  require(stress_profile == "constant" || stress_profile == "rational",
          "stress.profile must be constant or rational");
  require(kappa_profile == "constant" || kappa_profile == "rational",
          "kappa.profile must be constant or rational");
}

StressLaw SimulationConfig::stress_law() const {
  auto profile = stress_profile == "rational" ? BoundedProfile::rational(nu_lo, nu_hi)
                                              : BoundedProfile::constant(nu);
  return StressLaw(p, std::move(profile), eps_d);
}

ConductivityLaw SimulationConfig::conductivity_law() const {
  return kappa_profile == "rational" ? ConductivityLaw::rational(kappa_lo, kappa_hi)
                                     : ConductivityLaw::constant(kappa_value);
}

namespace {

EquilibriumSolution solve_for(const SimulationConfig& cfg, const Grid& grid) {
  EquilibriumProblem eq;
  eq.grid = &grid;
  eq.law = cfg.conductivity_law();
  eq.boundary = cfg.theta_b;
  eq.tol = cfg.eq_tol;
  return solve_theta_hat(eq);
}

const SimulationConfig& validated(const SimulationConfig& cfg) {
  cfg.validate();
  return cfg;
}

}  // namespace

Problem::Problem(const SimulationConfig& cfg)
    : cfg_(validated(cfg)),
      grid_(cfg.nx, cfg.ny, cfg.lx, cfg.ly, cfg.quad_order),
      basis_(grid_, cfg.n_modes),
      stress_(cfg.stress_law()),
      kappa_(cfg.conductivity_law()),
      eq_(solve_for(cfg, grid_)),
      theta_hat_(eq_.theta_hat),
      ring_(cfg.theta_b.ring_field(grid_, 0.0)) {}

FaceField Problem::face_fluxes(std::span<const double> coeffs) const {
  return cfg_.face_flux == FaceFlux::Stream ? stream_face_fluxes(grid_, basis_, coeffs)
                                            : point_face_fluxes(grid_, basis_, coeffs);
}

FaceField Problem::face_conductivity(const ScalarField& theta) const {
  if (cfg_.face_conductivity == FaceConductivity::Kirchhoff)
    return kirchhoff_face_conductivity(grid_, kappa_, theta);
  ScalarField k(grid_, 0.0);
  for (int j = 0; j < grid_.py(); ++j)
    for (int i = 0; i < grid_.px(); ++i) k(i, j) = kappa_(theta(i, j));
  return harmonic_face_conductivity(grid_, k);
}

// ---------------------------------------------------------------------------

VelocityState project_initial_velocity(const VelocityBasis& basis, const Grid& grid,
                                       const VelocitySpec& spec) {
  const auto n = static_cast<std::size_t>(basis.size());
  VelocityState s;
  s.coeffs.assign(n, 0.0);
  switch (spec.kind) {
    case VelocitySpec::Kind::Zero:
      break;
    case VelocitySpec::Kind::Coeffs:
      if (spec.coeffs.size() > n)
        throw ConfigError("v0.coeffs lists " + std::to_string(spec.coeffs.size()) +
                          " coefficients but the basis has " + std::to_string(n) + " modes");
      std::copy(spec.coeffs.begin(), spec.coeffs.end(), s.coeffs.begin());
      break;
    case VelocitySpec::Kind::Mode:
      if (spec.mode < 1 || static_cast<std::size_t>(spec.mode) > n)
        throw ConfigError("v0.mode " + std::to_string(spec.mode) + " is outside the basis (1.." +
                          std::to_string(n) + ")");
      s.coeffs[static_cast<std::size_t>(spec.mode - 1)] = spec.amplitude;
      break;
    case VelocitySpec::Kind::Random: {
      if (!(spec.energy >= 0.0)) throw ConfigError("v0.random_energy must be nonnegative");
      std::mt19937_64 rng(spec.seed);
      std::normal_distribution<double> normal(0.0, 1.0);
      double e = 0.0;
      for (auto& c : s.coeffs) {
        c = normal(rng);
        e += 0.5 * c * c;
      }
      const double scale = e > 0.0 ? std::sqrt(spec.energy / e) : 0.0;
      for (auto& c : s.coeffs) c *= scale;
      break;
    }
    case VelocitySpec::Kind::Field: {
      if (!spec.field) throw ConfigError("v0 field is not set");
      const auto& qp = grid.quad_points();
      for (std::size_t q = 0; q < qp.size(); ++q) {
        const Vec2 v = spec.field(qp[q].x, qp[q].y);
        for (std::size_t j = 0; j < n; ++j) {
          const auto& w = basis.at_quad(q, static_cast<int>(j));
          s.coeffs[j] += qp[q].w * (v.x * w.u + v.y * w.v);
        }
      }
      break;
    }
  }
  for (double c : s.coeffs)
    if (!std::isfinite(c)) throw ConfigError("initial velocity coefficients must be finite");
  return s;
}

ScalarField read_temperature_file(const std::string& path, const Grid& grid) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open temperature file '" + path + "'");
  std::string line;
  std::vector<double> values;
  bool first = true;
  bool skip_next = false;
  while (std::getline(in, line)) {
    if (first && line.rfind("nsf-snapshot", 0) == 0) {
      skip_next = true;  // the coefficient row follows the header
      first = false;
      continue;
    }
    first = false;
    if (skip_next) {
      skip_next = false;
      continue;
    }
    std::istringstream ls(line);
    double v;
    while (ls >> v) values.push_back(v);
    if (!ls.eof()) throw ConfigError("non-numeric entry in temperature file '" + path + "'");
  }
  if (values.size() != grid.node_count())
    throw ConfigError("temperature file '" + path + "' has " + std::to_string(values.size()) +
                      " values, expected " + std::to_string(grid.node_count()));
  ScalarField f(grid);
  std::copy(values.begin(), values.end(), f.values().begin());
  return f;
}

RegularizedTemperature regularize_initial_temperature(const TemperatureSpec& spec,
                                                      const Problem& problem) {
  const Grid& grid = problem.grid();
  const auto& cfg = problem.config();
  ScalarField raw(grid, 0.0);
  switch (spec.kind) {
    case TemperatureSpec::Kind::Equilibrium:
      raw = problem.theta_hat();
      break;
    case TemperatureSpec::Kind::Constant:
      raw = ScalarField(grid, spec.value);
      break;
    case TemperatureSpec::Kind::Bump:
      raw = problem.theta_hat();
      for (int j = 1; j <= grid.ny(); ++j)
        for (int i = 1; i <= grid.nx(); ++i)
          raw(i, j) += spec.bump_amplitude * bspline_bump(spec.bump_cx * grid.lx(), spec.bump_width * grid.lx(), grid.x(i)) *
                       bspline_bump(spec.bump_cy * grid.ly(), spec.bump_width * grid.ly(), grid.y(j));
      break;
    case TemperatureSpec::Kind::File:
      raw = read_temperature_file(spec.file, grid);
      break;
    case TemperatureSpec::Kind::Manufactured:
      for (int j = 0; j < grid.py(); ++j)
        for (int i = 0; i < grid.px(); ++i) raw(i, j) = cfg.mms_solution.value(0.0, grid.x(i), grid.y(j));
      break;
  }
  cfg.theta_b.fill_ring(grid, raw);
  for (int j = 0; j < grid.py(); ++j)
    for (int i = 0; i < grid.px(); ++i)
      if (!(raw(i, j) > 0.0) || !std::isfinite(raw(i, j)))
        throw ConfigError("initial temperature must be positive at every node (mu > 0 requirement); "
                          "found " + std::to_string(raw(i, j)) + " at node (" + std::to_string(i) + ", " +
                          std::to_string(j) + ")");
  RegularizedTemperature out{raw, 0.0};
  if (spec.floor > 0.0)
    for (int j = 0; j < grid.py(); ++j)
      for (int i = 0; i < grid.px(); ++i)
        if (out.theta(i, j) < spec.floor) {
          out.l1_change += grid.nodal_weight(i, j) * (spec.floor - out.theta(i, j));
          out.theta(i, j) = spec.floor;
        }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<double> theta_at_quad(const Grid& grid, const ScalarField& theta) {
  const auto& qp = grid.quad_points();
  std::vector<double> out(qp.size());
  for (std::size_t q = 0; q < qp.size(); ++q) out[q] = interpolate(theta, qp[q]);
  return out;
}

ModeSample field_at(const VelocityBasis& basis, std::size_t q, std::span<const double> c) {
  ModeSample s;
  for (int j = 0; j < basis.size(); ++j) s.axpy(c[static_cast<std::size_t>(j)], basis.at_quad(q, j));
  return s;
}

// int (v x v):grad w_j at one point, times the weight.
double convective(const ModeSample& v, const ModeSample& w) {
  return v.u * (v.u * w.ux + v.v * w.uy) + v.v * (v.u * w.vx + v.v * w.vy);
}

void require_coeffs(const Problem& problem, std::span<const double> coeffs) {
  if (static_cast<int>(coeffs.size()) != problem.basis().size())
    throw std::invalid_argument("coefficient vector does not match the basis dimension");
}

}  // namespace

std::vector<double> momentum_rhs(const Problem& problem, std::span<const double> coeffs,
                                 const ScalarField& theta) {
  require_coeffs(problem, coeffs);
  const auto& basis = problem.basis();
  const auto& qp = problem.grid().quad_points();
  const auto n = static_cast<std::size_t>(basis.size());
  std::vector<double> f(n, 0.0);
  for (std::size_t q = 0; q < qp.size(); ++q) {
    const ModeSample v = field_at(basis, q, coeffs);
    const SymTensor d = v.sym_gradient();
    const SymTensor s = stress(problem.stress(), interpolate(theta, qp[q]), d);
    for (std::size_t j = 0; j < n; ++j) {
      const auto& w = basis.at_quad(q, static_cast<int>(j));
      f[j] += qp[q].w * (convective(v, w) - double_dot(s, w.sym_gradient()));
    }
  }
  return f;
}

double dissipation(const Problem& problem, std::span<const double> coeffs, const ScalarField& theta) {
  require_coeffs(problem, coeffs);
  const auto& qp = problem.grid().quad_points();
  double total = 0.0;
  for (std::size_t q = 0; q < qp.size(); ++q) {
    const SymTensor d = field_at(problem.basis(), q, coeffs).sym_gradient();
    total += qp[q].w * stress_power(problem.stress(), interpolate(theta, qp[q]), d);
  }
  return total;
}

MomentumResult momentum_step(const Problem& problem, const VelocityState& old,
                             const ScalarField& theta_old, double dt) {
  require_coeffs(problem, old.coeffs);
  const auto& cfg = problem.config();
  const auto& basis = problem.basis();
  const auto& law = problem.stress();
  const auto& qp = problem.grid().quad_points();
  const int n = basis.size();
  const auto nn = static_cast<std::size_t>(n);

  MomentumResult res;
  res.velocity.t = old.t + dt;
  const bool all_zero = std::all_of(old.coeffs.begin(), old.coeffs.end(), [](double c) { return c == 0.0; });
  if (all_zero) {
    // Rest is a fixed point: S(theta, 0) = 0 and the convective term vanishes.
    res.velocity.coeffs = old.coeffs;
    return res;
  }

  const auto theta_q = theta_at_quad(problem.grid(), theta_old);
  std::vector<double> nu_q(qp.size());
  for (std::size_t q = 0; q < qp.size(); ++q) nu_q[q] = law.viscosity()(theta_q[q]);
  // Precomputed mode symmetric gradients.
  std::vector<SymTensor> dw(qp.size() * nn);
  for (std::size_t q = 0; q < qp.size(); ++q)
    for (std::size_t j = 0; j < nn; ++j) dw[q * nn + j] = basis.at_quad(q, static_cast<int>(j)).sym_gradient();

  const double p = law.p(), eps2 = law.eps_d() * law.eps_d();
  // Below this |D| the p < 2 viscosity is capped inside the Picard matrix only.
  const double d_floor = (p < 2.0 && eps2 == 0.0) ? 1e-10 : 0.0;

  std::vector<double> c = old.coeffs;
  Eigen::MatrixXd K(n, n);
  Eigen::VectorXd rhs(n);
  double increment = std::numeric_limits<double>::infinity();
  int it = 0;
  for (it = 1; it <= cfg.picard_max_iters; ++it) {
    K.setZero();
    for (int j = 0; j < n; ++j) rhs[j] = old.coeffs[static_cast<std::size_t>(j)];
    for (std::size_t q = 0; q < qp.size(); ++q) {
      const ModeSample v = field_at(basis, q, c);
      const SymTensor d = v.sym_gradient();
      double dn = std::max(d.norm(), d_floor);
      double mu_eff = 0.0;
      if (dn > 0.0) mu_eff = p == 2.0 ? nu_q[q] : nu_q[q] * std::pow(eps2 + dn * dn, 0.5 * (p - 2.0));
      const double wm = qp[q].w * mu_eff;
      for (std::size_t a = 0; a < nn; ++a) {
        const auto& wa = basis.at_quad(q, static_cast<int>(a));
        rhs[static_cast<Eigen::Index>(a)] += dt * qp[q].w * convective(v, wa);
        if (wm == 0.0) continue;
        for (std::size_t b = 0; b <= a; ++b)
          K(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) += wm * double_dot(dw[q * nn + a], dw[q * nn + b]);
      }
    }
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < a; ++b) K(b, a) = K(a, b);
    Eigen::MatrixXd system = dt * K;
    system.diagonal().array() += 1.0;
    const Eigen::VectorXd sol = system.ldlt().solve(rhs);
    double inc = 0.0, cmax = 0.0;
    for (int j = 0; j < n; ++j) {
      const double next = (1.0 - cfg.picard_damping) * c[static_cast<std::size_t>(j)] + cfg.picard_damping * sol[j];
      inc = std::max(inc, std::abs(next - c[static_cast<std::size_t>(j)]));
      cmax = std::max(cmax, std::abs(next));
      c[static_cast<std::size_t>(j)] = next;
    }
    for (double v : c)
      if (!std::isfinite(v)) throw SolverError("Picard iteration produced non-finite coefficients");
    increment = inc;
    if (inc <= cfg.picard_tol * std::max(cmax, 1e-300)) break;
  }
  if (it > cfg.picard_max_iters)
    throw SolverError("Picard iteration did not converge in " + std::to_string(cfg.picard_max_iters) +
                      " iterations (last increment " + std::to_string(increment) + ")");
  res.velocity.coeffs = std::move(c);
  res.iterations = it;
  res.increment = increment;
  return res;
}

ScalarField heating_field(const Problem& problem, std::span<const double> coeffs,
                          const ScalarField& theta) {
  require_coeffs(problem, coeffs);
  const Grid& grid = problem.grid();
  const auto& qp = grid.quad_points();
  ScalarField h(grid, 0.0);
  if (std::all_of(coeffs.begin(), coeffs.end(), [](double c) { return c == 0.0; })) return h;
  auto interior = [&](int i, int j, double v) {
    // Shares of boundary-ring corners go to the nearest interior node so the nodal heating
    // integrates exactly to the dissipation.
    h(std::clamp(i, 1, grid.nx()), std::clamp(j, 1, grid.ny())) += v;
  };
  for (std::size_t q = 0; q < qp.size(); ++q) {
    const SymTensor d = field_at(problem.basis(), q, coeffs).sym_gradient();
    const double pw = qp[q].w * stress_power(problem.stress(), interpolate(theta, qp[q]), d);
    const double sx = qp[q].sx, sy = qp[q].sy;
    interior(qp[q].ci, qp[q].cj, pw * (1 - sx) * (1 - sy));
    interior(qp[q].ci + 1, qp[q].cj, pw * sx * (1 - sy));
    interior(qp[q].ci, qp[q].cj + 1, pw * (1 - sx) * sy);
    interior(qp[q].ci + 1, qp[q].cj + 1, pw * sx * sy);
  }
  const double inv = 1.0 / grid.cv_area();
  for (double& v : h.values()) v *= inv;
  return h;
}

ScalarField mms_source(const ManufacturedSolution& ms, const ConductivityLaw& kappa, const Grid& grid,
                       double t, const VelocityBasis* basis, std::span<const double> coeffs) {
  ScalarField f(grid, 0.0);
  const bool moving = basis != nullptr &&
                      std::any_of(coeffs.begin(), coeffs.end(), [](double c) { return c != 0.0; });
  for (int j = 0; j < grid.py(); ++j)
    for (int i = 0; i < grid.px(); ++i) {
      const double x = grid.x(i), y = grid.y(j);
      const double th = ms.value(t, x, y);
      const Vec2 g = ms.gradient(t, x, y);
      double v = ms.time_derivative(t, x, y) - kappa.derivative(th) * (g.x * g.x + g.y * g.y) -
                 kappa(th) * ms.laplacian(t, x, y);
      if (moving) {
        const ModeSample s = eval_field(*basis, coeffs, x, y);
        v += s.u * g.x + s.v * g.y;
      }
      f(i, j) = v;
    }
  return f;
}

TemperatureResult temperature_step(const Problem& problem, const ScalarField& theta_old,
                                   std::span<const double> coeffs_new, const ScalarField& heating,
                                   double dt, const ScalarField* extra_source) {
  const Grid& grid = problem.grid();
  const FaceField kf = problem.face_conductivity(theta_old);
  const FaceField flux = problem.face_fluxes(coeffs_new);
  Stencil5 op = diffusion_operator(grid, kf);
  op += convection_operator(grid, flux);
  op.shift(1.0 / dt);

  const ScalarField& ring = problem.theta_ring();
  const auto coupling = op.boundary_coupling(ring);
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(grid.interior_count()));
  for (int j = 1; j <= grid.ny(); ++j)
    for (int i = 1; i <= grid.nx(); ++i) {
      const std::size_t k = grid.unknown(i, j);
      double r = theta_old(i, j) / dt + heating(i, j) - coupling[k];
      if (extra_source != nullptr) r += (*extra_source)(i, j);
      rhs[static_cast<Eigen::Index>(k)] = r;
    }

  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  const Eigen::SparseMatrix<double> A = op.matrix();
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw SolverError("temperature matrix factorization failed");
  const Eigen::VectorXd x = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !x.allFinite()) throw SolverError("temperature solve failed");

  TemperatureResult out;
  out.theta = ring;
  for (int j = 1; j <= grid.ny(); ++j)
    for (int i = 1; i <= grid.nx(); ++i) out.theta(i, j) = x[static_cast<Eigen::Index>(grid.unknown(i, j))];

  // Bookkeeping: change of the interior internal energy against heating, boundary
  // diffusive influx and convective outflux, each evaluated independently of the matrix.
  const double cv = grid.cv_area();
  double change = 0.0, change_abs = 0.0, source = 0.0, source_abs = 0.0;
  for (int j = 1; j <= grid.ny(); ++j)
    for (int i = 1; i <= grid.nx(); ++i) {
      const double d = cv * (out.theta(i, j) - theta_old(i, j));
      double s = heating(i, j);
      if (extra_source != nullptr) s += (*extra_source)(i, j);
      change += d;
      change_abs += std::abs(d);
      source += dt * cv * s;
      source_abs += dt * cv * std::abs(s);
    }
  double boundary = 0.0, boundary_abs = 0.0;
  auto face = [&](double kappa_face, double len_over_dist, double th_ring, double th_in, double f_out) {
    const double diff = dt * kappa_face * len_over_dist * (th_ring - th_in);
    const double conv = dt * f_out * (f_out > 0.0 ? th_in : th_ring);
    boundary += diff - conv;
    boundary_abs += std::abs(diff) + std::abs(conv);
  };
  const double rx = grid.hy() / grid.hx(), ry = grid.hx() / grid.hy();
  const int nx = grid.nx(), ny = grid.ny();
  for (int j = 1; j <= ny; ++j) {
    face(kf.x(0, j), rx, out.theta(0, j), out.theta(1, j), -flux.x(0, j));
    face(kf.x(nx, j), rx, out.theta(nx + 1, j), out.theta(nx, j), flux.x(nx, j));
  }
  for (int i = 1; i <= nx; ++i) {
    face(kf.y(i, 0), ry, out.theta(i, 0), out.theta(i, 1), -flux.y(i, 0));
    face(kf.y(i, ny), ry, out.theta(i, ny + 1), out.theta(i, ny), flux.y(i, ny));
  }
  const double scale = change_abs + source_abs + boundary_abs;
  const double residual = change - source - boundary;
  out.internal_energy_residual = scale > 0.0 ? std::abs(residual) / scale : std::abs(residual);
  return out;
}

SimulationState coupled_step(const Problem& problem, const SimulationState& state, double dt) {
  const auto& cfg = problem.config();
  SimulationState next;
  next.t = state.t + dt;
  next.step = state.step + 1;
  ScalarField theta_lag = state.theta;
  std::optional<ScalarField> extra;
  if (cfg.mms)
    extra = mms_source(cfg.mms_solution, problem.kappa(), problem.grid(), next.t);
  for (int sweep = 0; sweep < cfg.coupling_sweeps; ++sweep) {
    const MomentumResult mom = momentum_step(problem, state.velocity, theta_lag, dt);
    ScalarField heat = heating_field(problem, mom.velocity.coeffs, theta_lag);
    TemperatureResult temp = temperature_step(problem, state.theta, mom.velocity.coeffs, heat, dt,
                                              extra ? &*extra : nullptr);
    next.velocity = mom.velocity;
    next.heating = std::move(heat);
    next.last.picard_iterations = mom.iterations;
    next.last.picard_increment = mom.increment;
    next.last.internal_energy_residual = temp.internal_energy_residual;
    next.last.dissipation = dissipation(problem, next.velocity.coeffs, theta_lag);
    if (sweep + 1 < cfg.coupling_sweeps) theta_lag = temp.theta;
    next.theta = std::move(temp.theta);
  }
  const auto& c0 = state.velocity.coeffs;
  const auto& c1 = next.velocity.coeffs;
  double jump = 0.0;
  for (std::size_t j = 0; j < c0.size(); ++j) jump += (c1[j] - c0[j]) * (c1[j] - c0[j]);
  next.last.energy_defect = next.velocity.kinetic_energy() - state.velocity.kinetic_energy() + 0.5 * jump +
                            dt * next.last.dissipation;
  const auto div = divergence_defect(problem.grid(), problem.face_fluxes(c1));
  double dmax = 0.0;
  for (double v : div) dmax = std::max(dmax, std::abs(v));
  next.last.divergence_defect = dmax;
  const double tmax = std::max(std::abs(next.theta.max()), std::abs(next.theta.min()));
  next.last.min_principle_slack =
      dt * dmax * tmax + 64.0 * std::numeric_limits<double>::epsilon() * tmax;
  return next;
}

SimulationState initial_state(Problem& problem) {
  const auto& cfg = problem.config();
  RegularizedTemperature t0 = regularize_initial_temperature(cfg.theta0, problem);
  problem.set_mu(compute_mu(problem.theta_hat(), t0.theta));
  SimulationState s;
  s.t = 0.0;
  s.step = 0;
  s.velocity = project_initial_velocity(problem.basis(), problem.grid(), cfg.v0);
  s.velocity.t = 0.0;
  s.theta = std::move(t0.theta);
  s.heating = heating_field(problem, s.velocity.coeffs, s.theta);
  return s;
}

}  // namespace nsf
