#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nsf/basis.hpp"
#include "nsf/constitutive.hpp"
#include "nsf/equilibrium.hpp"
#include "nsf/grid.hpp"
#include "nsf/scalar_ops.hpp"

namespace nsf {

enum class FaceFlux { Stream, Point };
enum class FaceConductivity { Kirchhoff, Harmonic };

/// Initial velocity: explicit coefficients, one scaled mode, random coefficients with a
/// kinetic-energy target, or an analytic divergence-free field projected onto the basis.
struct VelocitySpec {
  enum class Kind { Zero, Coeffs, Mode, Random, Field };
  Kind kind = Kind::Zero;
  std::vector<double> coeffs;
  int mode = 1;  // 1-based
  double amplitude = 1.0;
  double energy = 0.5;
  std::uint64_t seed = 1;
  /// Field kind: velocity (u, v) at (x, y).
  std::function<Vec2(double, double)> field;
};

/// Smooth polynomial velocity field of the stream function A x^2(Lx-x)^2 y^2(Ly-y)^2 (scaled).
std::function<Vec2(double, double)> polynomial_vortex(double amplitude, double lx, double ly);

/// Nonnegative C^2 cubic B-spline bump of unit height and half-width `width`.
double bspline_bump(double center, double width, double x);
double bspline_bump_d1(double center, double width, double x);

struct TemperatureSpec {
  enum class Kind { Equilibrium, Constant, Bump, File, Manufactured };
  Kind kind = Kind::Equilibrium;
  double value = 1.0;
  // Bump: theta_hat + amplitude * b(x) b(y) with cubic B-spline bumps.
  double bump_amplitude = 1.0;
  double bump_cx = 0.5, bump_cy = 0.5, bump_width = 0.25;
  std::string file;
  double floor = 0.0;  // values below a positive floor are clipped to it
};

/// Smooth manufactured temperature base + A exp(-lambda t) sin(pi x/Lx) sin(pi y/Ly).
struct ManufacturedSolution {
  double base = 2.0;
  double amplitude = 1.0;
  double decay = 1.0;
  double lx = 1.0, ly = 1.0;

  double value(double t, double x, double y) const;
  double time_derivative(double t, double x, double y) const;
  Vec2 gradient(double t, double x, double y) const;
  double laplacian(double t, double x, double y) const;
};

struct SimulationConfig {
  // grid and basis
  int nx = 32, ny = 32;
  double lx = 1.0, ly = 1.0;
  int quad_order = 3;
  int n_modes = 6;
  // constitutive laws
  double p = 2.2;
  std::string stress_profile = "constant";
  double nu = 1.0, nu_lo = 1.0, nu_hi = 2.0;
  double eps_d = 0.0;
  std::string kappa_profile = "constant";
  double kappa_value = 1.0, kappa_lo = 1.0, kappa_hi = 2.0;
  // equilibrium
  BoundaryData theta_b = BoundaryData::uniform(1.0);
  double eq_tol = 1e-13;
  // time stepping
  double dt = 1e-2;
  double t_end = 1.0;
  int record_every = 1;
  std::string out_dir;
  std::uint64_t seed = 1;
  int coupling_sweeps = 1;
  int picard_max_iters = 50;
  double picard_tol = 1e-12;
  double picard_damping = 1.0;
  // discretization options
  FaceFlux face_flux = FaceFlux::Stream;
  FaceConductivity face_conductivity = FaceConductivity::Kirchhoff;
  // initial data
  VelocitySpec v0;
  TemperatureSpec theta0;
  // manufactured source
  bool mms = false;
  ManufacturedSolution mms_solution;
  // diagnostics
  double diag_r = 1.5, diag_s = 1.2, diag_alpha = 0.25;
  double diag_M = 10.0, diag_delta = 1.0;
  bool write_snapshots = true;

  /// Throws ConfigError on inconsistent values.
  void validate() const;
  StressLaw stress_law() const;
  ConductivityLaw conductivity_law() const;
};

/// Immutable problem data shared by every step of a run.
class Problem {
 public:
  explicit Problem(const SimulationConfig& cfg);

  const SimulationConfig& config() const { return cfg_; }
  const Grid& grid() const { return grid_; }
  const VelocityBasis& basis() const { return basis_; }
  const StressLaw& stress() const { return stress_; }
  const ConductivityLaw& kappa() const { return kappa_; }
  const ScalarField& theta_hat() const { return theta_hat_; }
  const EquilibriumSolution& equilibrium() const { return eq_; }
  /// Boundary ring values (interior zero).
  const ScalarField& theta_ring() const { return ring_; }
  double mu() const { return mu_; }
  void set_mu(double mu) { mu_ = mu; }

  FaceField face_fluxes(std::span<const double> coeffs) const;
  FaceField face_conductivity(const ScalarField& theta) const;

 private:
  SimulationConfig cfg_;
  Grid grid_;
  VelocityBasis basis_;
  StressLaw stress_;
  ConductivityLaw kappa_;
  EquilibriumSolution eq_;
  ScalarField theta_hat_;
  ScalarField ring_;
  double mu_ = 0.0;
};

struct StepReport {
  int picard_iterations = 0;
  double picard_increment = 0.0;
  /// E_new - E_old + |c_new - c_old|^2 / 2 + dt * dissipation; equals dt times the
  /// quadrature defect of the skew convective term.
  double energy_defect = 0.0;
  double dissipation = 0.0;
  /// Internal-energy bookkeeping residual over the step divided by the sum of the
  /// magnitudes of its terms.
  double internal_energy_residual = 0.0;
  double divergence_defect = 0.0;  // max |net flux| / |CV| over control volumes
  double min_principle_slack = 0.0;
};

struct SimulationState {
  double t = 0.0;
  long step = 0;
  VelocityState velocity;
  ScalarField theta;
  /// Nodal viscous heating S:Dv per unit area, as used by the last temperature step.
  ScalarField heating;
  StepReport last;
};

VelocityState project_initial_velocity(const VelocityBasis& basis, const Grid& grid,
                                       const VelocitySpec& spec);

struct RegularizedTemperature {
  ScalarField theta;
  double l1_change = 0.0;
};

/// Samples the initial temperature at the nodes, replaces the ring by theta_b, and clips
/// below at spec.floor. Nonpositive samples are rejected.
RegularizedTemperature regularize_initial_temperature(const TemperatureSpec& spec,
                                                      const Problem& problem);

/// Reads a full (nx+2) x (ny+2) temperature field from a snapshot or a plain whitespace table.
ScalarField read_temperature_file(const std::string& path, const Grid& grid);

/// Galerkin right-hand side F_j(c; theta) = int (v x v):grad w_j - int S(theta, Dv):Dw_j.
std::vector<double> momentum_rhs(const Problem& problem, std::span<const double> coeffs,
                                 const ScalarField& theta);

/// Kinetic dissipation int S(theta, Dv):Dv by quadrature.
double dissipation(const Problem& problem, std::span<const double> coeffs, const ScalarField& theta);

struct MomentumResult {
  VelocityState velocity;
  int iterations = 0;
  double increment = 0.0;
};

/// Implicit Euler step with lagged-viscosity Picard iterations
/// (I + dt K(c^k)) c^{k+1} = c_old + dt T(c^k), K_ij = int mu_eff(theta_old, Dv^k) Dw_i:Dw_j.
MomentumResult momentum_step(const Problem& problem, const VelocityState& old,
                             const ScalarField& theta_old, double dt);

/// Nodal heating per unit area: the quadrature values of S:Dv distributed with bilinear hat
/// weights and divided by the control-volume area.
ScalarField heating_field(const Problem& problem, std::span<const double> coeffs,
                          const ScalarField& theta);

/// Manufactured source f = d_t theta* + v.grad theta* - div(kappa(theta*) grad theta*) at nodes.
ScalarField mms_source(const ManufacturedSolution& ms, const ConductivityLaw& kappa, const Grid& grid,
                       double t, const VelocityBasis* basis = nullptr,
                       std::span<const double> coeffs = {});

struct TemperatureResult {
  ScalarField theta;
  double internal_energy_residual = 0.0;
};

/// Implicit step (theta - theta_old)/dt + C(v_new) theta + A(kappa_f(theta_old)) theta =
/// heating (+ extra) with the Dirichlet ring held at theta_b.
TemperatureResult temperature_step(const Problem& problem, const ScalarField& theta_old,
                                   std::span<const double> coeffs_new, const ScalarField& heating,
                                   double dt, const ScalarField* extra_source = nullptr);

/// Momentum step with theta_old, then temperature step with the fresh velocity and the
/// heating S(theta_old, Dv_new):Dv_new; extra sweeps redo both with the updated temperature.
SimulationState coupled_step(const Problem& problem, const SimulationState& state, double dt);

/// Initial state from the configuration; also sets problem.mu.
SimulationState initial_state(Problem& problem);

}  // namespace nsf
