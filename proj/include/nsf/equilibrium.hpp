#pragma once

#include <array>
#include <string>

#include "nsf/constitutive.hpp"
#include "nsf/grid.hpp"

namespace nsf {

/// Affine function a + b*s of the physical coordinate s along one side.
struct SideData {
  double a = 1.0;
  double b = 0.0;

  double operator()(double s) const { return a + b * s; }
  /// Parses "2", "1+2*s", "3 - 0.5*s", "s", "-s+4".
  static SideData parse(const std::string& text);
  std::string str() const;
};

/// Dirichlet temperature on the four sides. On left/right s = y, on top/bottom s = x.
/// Corner nodes take the mean of the two adjacent sides.
struct BoundaryData {
  SideData left, right, bottom, top;

  static BoundaryData uniform(double value);
  /// Writes the boundary ring of `field`; interior untouched.
  void fill_ring(const Grid& grid, ScalarField& field) const;
  ScalarField ring_field(const Grid& grid, double interior_value) const;
};

struct EquilibriumProblem {
  const Grid* grid = nullptr;
  ConductivityLaw law = ConductivityLaw::constant(1.0);
  BoundaryData boundary;
  double tol = 1e-13;        // relative residual of the transformed linear system
  double floor = 1e-12;      // minimum admissible boundary temperature
  int max_iterations = 0;    // 0: 10 * unknowns
};

struct EquilibriumSolution {
  ScalarField theta_hat;
  double linear_residual = 0.0;    // ||A(1)u - b|| / ||b||
  double kirchhoff_defect = 0.0;   // max |A(1) K(theta_hat)| h^2 / max(1, max|K|)
  int iterations = 0;
};

/// Solves -div(kappa(theta) grad theta) = 0 with theta = theta_b on the ring by the
/// Kirchhoff transform: a Jacobi-preconditioned CG solve of the discrete Laplace problem
/// for u = K(theta), then theta_hat = K^{-1}(u) nodewise.
EquilibriumSolution solve_theta_hat(const EquilibriumProblem& problem);

/// min over both fields (rings included). Throws ConfigError unless positive.
double compute_mu(const ScalarField& theta_hat, const ScalarField& theta0);

}  // namespace nsf
