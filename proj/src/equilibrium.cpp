#include "nsf/equilibrium.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include <Eigen/IterativeLinearSolvers>

#include "nsf/error.hpp"
#include "nsf/scalar_ops.hpp"
#include "nsf/truncation.hpp"

namespace nsf {

namespace {

constexpr double kKirchhoffRef = 1.0;

// Parses one unsigned term: "2", "2*s", "s", "s*2", "2s".
void add_term(const std::string& term, double sign, SideData& out, const std::string& whole) {
  if (term.empty()) throw ConfigError("malformed boundary expression '" + whole + "'");
  auto number = [&](const std::string& t) {
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (t.empty() || end != t.c_str() + t.size() || !std::isfinite(v))
      throw ConfigError("malformed boundary expression '" + whole + "'");
    return v;
  };
  const auto spos = term.find('s');
  if (spos == std::string::npos) {
    out.a += sign * number(term);
    return;
  }
  if (term.find('s', spos + 1) != std::string::npos)
    throw ConfigError("boundary expression must be affine in s: '" + whole + "'");
  std::string coef = term.substr(0, spos) + term.substr(spos + 1);
  if (!coef.empty() && coef.front() == '*') coef.erase(0, 1);
  if (!coef.empty() && coef.back() == '*') coef.pop_back();
  out.b += sign * (coef.empty() ? 1.0 : number(coef));
}

}  // namespace

SideData SideData::parse(const std::string& text) {
  std::string t;
  for (char ch : text)
    if (!std::isspace(static_cast<unsigned char>(ch))) t.push_back(ch);
  if (t.empty()) throw ConfigError("empty boundary expression");
  SideData out{0.0, 0.0};
  std::size_t pos = 0;
  double sign = 1.0;
  if (t[0] == '+' || t[0] == '-') {
    sign = t[0] == '-' ? -1.0 : 1.0;
    pos = 1;
  }
  std::string term;
  for (std::size_t i = pos; i < t.size(); ++i) {
    const char ch = t[i];
    // A sign after an exponent marker belongs to the number.
    const bool exponent_sign = (ch == '+' || ch == '-') && i > 0 && (t[i - 1] == 'e' || t[i - 1] == 'E') &&
                               i > 1 && (std::isdigit(static_cast<unsigned char>(t[i - 2])) || t[i - 2] == '.');
    if ((ch == '+' || ch == '-') && !exponent_sign) {
      add_term(term, sign, out, text);
      term.clear();
      sign = ch == '-' ? -1.0 : 1.0;
    } else {
      term.push_back(ch);
    }
  }
  add_term(term, sign, out, text);
  return out;
}

std::string SideData::str() const {
  std::ostringstream os;
  os.precision(17);
  os << a;
  if (b != 0.0) os << (b < 0 ? "-" : "+") << std::abs(b) << "*s";
  return os.str();
}

BoundaryData BoundaryData::uniform(double value) {
  const SideData s{value, 0.0};
  return {s, s, s, s};
}

void BoundaryData::fill_ring(const Grid& grid, ScalarField& field) const {
  const int ex = grid.nx() + 1, ey = grid.ny() + 1;
  for (int j = 1; j < ey; ++j) {
    field(0, j) = left(grid.y(j));
    field(ex, j) = right(grid.y(j));
  }
  for (int i = 1; i < ex; ++i) {
    field(i, 0) = bottom(grid.x(i));
    field(i, ey) = top(grid.x(i));
  }
  field(0, 0) = 0.5 * (left(0.0) + bottom(0.0));
  field(ex, 0) = 0.5 * (right(0.0) + bottom(grid.lx()));
  field(0, ey) = 0.5 * (left(grid.ly()) + top(0.0));
  field(ex, ey) = 0.5 * (right(grid.ly()) + top(grid.lx()));
}

ScalarField BoundaryData::ring_field(const Grid& grid, double interior_value) const {
  ScalarField f(grid, interior_value);
  fill_ring(grid, f);
  return f;
}

EquilibriumSolution solve_theta_hat(const EquilibriumProblem& problem) {
  if (problem.grid == nullptr) throw std::invalid_argument("equilibrium problem has no grid");
  const Grid& grid = *problem.grid;
  const auto& law = problem.law;
  if (!(law.lo() > 0.0)) throw ConfigError("conductivity lower bound must be positive");

  ScalarField theta_b = problem.boundary.ring_field(grid, 0.0);
  const double bmin = theta_b.boundary_min(), bmax = theta_b.boundary_max();
  if (!(bmin > problem.floor))
    throw ConfigError("boundary temperature must stay above " + std::to_string(problem.floor) +
                      " (min found " + std::to_string(bmin) + ")");

  ScalarField u(grid, 0.0);
  double u_mean = 0.0;
  int ring = 0;
  for (int j = 0; j < grid.py(); ++j)
    for (int i = 0; i < grid.px(); ++i)
      if (grid.is_boundary(i, j)) {
        u(i, j) = kirchhoff(law, theta_b(i, j), kKirchhoffRef);
        u_mean += u(i, j);
        ++ring;
      }
  u_mean /= ring;

  const Stencil5 lap = diffusion_operator(grid, FaceField(grid, 1.0));
  const SparseMatrix A = lap.matrix();
  const auto coupling = lap.boundary_coupling(u);
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(coupling.size()));
  for (std::size_t k = 0; k < coupling.size(); ++k) rhs[static_cast<Eigen::Index>(k)] = -coupling[k];

  EquilibriumSolution sol;
  Eigen::VectorXd x = Eigen::VectorXd::Constant(rhs.size(), u_mean);
  const double rhs_norm = rhs.norm();
  if (rhs_norm > 0.0 && (A * x - rhs).norm() > problem.tol * rhs_norm) {
    Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper,
                             Eigen::DiagonalPreconditioner<double>>
        cg;
    cg.setTolerance(problem.tol);
    cg.setMaxIterations(problem.max_iterations > 0 ? problem.max_iterations
                                                   : 10 * static_cast<int>(rhs.size()));
    cg.compute(A);
    x = cg.solveWithGuess(rhs, x);
    sol.iterations = static_cast<int>(cg.iterations());
    const double rel = (A * x - rhs).norm() / rhs_norm;
    if (cg.info() != Eigen::Success && rel > problem.tol * 10.0)
      throw SolverError("equilibrium CG did not converge: relative residual " + std::to_string(rel));
  }
  sol.linear_residual = rhs_norm > 0.0 ? (A * x - rhs).norm() / rhs_norm : 0.0;

  sol.theta_hat = theta_b;
  for (int j = 1; j <= grid.ny(); ++j)
    for (int i = 1; i <= grid.nx(); ++i) {
      const double t = kirchhoff_inverse(law, x[static_cast<Eigen::Index>(grid.unknown(i, j))], kKirchhoffRef);
      // Anything outside [bmin, bmax] beyond rounding is a real breach of the maximum principle.
      const double slack = 1e-10 * bmax;
      if (t < bmin - slack || t > bmax + slack)
        throw InvariantBreach("discrete maximum principle", 0,
                              "theta_hat=" + std::to_string(t) + " outside [" + std::to_string(bmin) +
                                  ", " + std::to_string(bmax) + "]");
      sol.theta_hat(i, j) = std::clamp(t, bmin, bmax);
    }

  ScalarField k_field(grid, 0.0);
  double kmax = 1.0;
  for (int j = 0; j < grid.py(); ++j)
    for (int i = 0; i < grid.px(); ++i) {
      k_field(i, j) = kirchhoff(law, sol.theta_hat(i, j), kKirchhoffRef);
      kmax = std::max(kmax, std::abs(k_field(i, j)));
    }
  const auto r = lap.apply(k_field);
  double rmax = 0.0;
  for (double v : r) rmax = std::max(rmax, std::abs(v));
  sol.kirchhoff_defect = rmax * std::min(grid.hx(), grid.hy()) * std::min(grid.hx(), grid.hy()) / kmax;
  return sol;
}

double compute_mu(const ScalarField& theta_hat, const ScalarField& theta0) {
  if (!theta_hat.all_finite() || !theta0.all_finite())
    throw ConfigError("temperature fields must be finite");
  const double mu = std::min(theta_hat.min(), theta0.min());
  if (!(mu > 0.0))
    throw ConfigError("mu = min(theta_hat, theta0) must be positive; found " + std::to_string(mu));
  return mu;
}

}  // namespace nsf
