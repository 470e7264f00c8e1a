#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nsf/solver.hpp"

namespace nsf {

/// eta = log(theta) nodewise. Throws std::domain_error on a nonpositive node.
ScalarField entropy_field(const ScalarField& theta);

/// S:Dv / theta + kappa(theta) |grad theta|^2 / theta^2 at every node, with the nodal heating
/// field standing for S:Dv and the central-difference gradient.
ScalarField entropy_production(const Problem& problem, const ScalarField& theta,
                               const ScalarField& heating);

/// One stored time level of a trajectory.
struct Frame {
  double t = 0.0;
  std::vector<double> coeffs;
  ScalarField theta;
  ScalarField heating;  // heating of the step that produced this level
};
using Trajectory = std::vector<Frame>;

Frame make_frame(const SimulationState& state);

/// Cubic B-spline bump of unit height on [center - width, center + width].
struct Bump {
  double center = 0.5;
  double width = 0.25;

  double value(double x) const;
  double d1(double x) const;
  double lo() const { return center - width; }
  double hi() const { return center + width; }
};

/// Separable test function phi(t, x, y) = amplitude B(t) bx(x) by(y). Without a time bump
/// B is identically one.
struct TestFunction {
  Bump x{0.5, 0.4};
  Bump y{0.5, 0.4};
  std::optional<Bump> t;
  double amplitude = 1.0;

  double time_value(double s) const { return t ? t->value(s) : 1.0; }
  double time_d1(double s) const { return t ? t->d1(s) : 0.0; }
  /// Nodal values of the spatial factor; throws if the support reaches the boundary.
  ScalarField spatial(const Grid& grid) const;
};

/// A weak-form residual and its parts. `normalized` = |residual| / sum |terms|.
struct WeakResidual {
  double residual = 0.0;
  double magnitude = 0.0;
  double normalized = 0.0;
  std::vector<std::pair<std::string, double>> terms;

  void finish();
};

/// Sum over the window of c_j^{k+1} - c_j^k - (t_{k+1} - t_k) F_j(c^{k+1}; theta^k), the implicit
/// Euler form of the Galerkin equation tested with mode j (0-based).
WeakResidual weak_residual_momentum(const Problem& problem, const Trajectory& traj, int mode);

/// Weak internal-energy balance
///   int theta(tb) phi(tb) - int theta(ta) phi(ta) - intint theta d_t phi - intint theta v.grad phi
///   + intint kappa grad theta.grad phi - intint S:Dv phi [- intint f phi]
/// with spatial terms in their finite-volume form. In time, theta is the piecewise-linear
/// interpolant of the frames and every other term is piecewise constant with its value at
/// the end of each interval (the backward Euler reading); both are integrated exactly.
WeakResidual weak_residual_internal_energy(const Problem& problem, const Trajectory& traj,
                                           const TestFunction& phi);

struct EntropyResidualOptions {
  /// Multiplies eta on every frame after the first (perturbation detector).
  double eta_scale = 1.0;
};

/// Weak entropy equation for eta = log theta, same structure as the internal-energy residual
/// with heating S:Dv/theta and production kappa |grad theta|^2 / theta^2.
WeakResidual weak_residual_entropy(const Problem& problem, const Trajectory& traj,
                                   const TestFunction& phi, const EntropyResidualOptions& opts = {});

/// Residual of intint kappa |T''(theta)| |grad theta|^2 = int (theta0 - T(theta0))
/// - int (theta - T(theta))(end) + intint (1 - T'(theta)) S:Dv with T the mollified cut-off
/// at level M, radius delta. Requires M > 2 max theta_b and delta < M/2. The left side uses
/// the face form kappa_f (theta_n - theta_p)(T'(theta_p) - T'(theta_n)); time integrals use
/// the right-endpoint rule.
WeakResidual truncated_energy_identity(const Problem& problem, const Trajectory& traj, double M,
                                       double delta);

struct AprioriExponents {
  double p = 2.2;
  double r = 1.5;
  double s = 1.2;
  double alpha = 0.25;
  /// Throws ConfigError naming the admissible range.
  void validate() const;
};

struct AprioriNorms {
  double sup_v_l2 = 0.0;            // sup_t ||v||_2
  double dv_lp = 0.0;               // ||Dv||_{L^p(Q)}
  double v_l5p3 = 0.0;              // ||v||_{L^{5p/3}(Q)}
  double theta_lr = 0.0;            // ||theta||_{L^r(Q)}
  double grad_theta_alpha_l2 = 0.0; // ||grad theta^alpha||_{L^2(Q)}
  double grad_theta_ls = 0.0;       // ||grad (theta - theta_hat)||_{L^s(Q)}
  double eta_l2 = 0.0, eta_l4 = 0.0, eta_l8 = 0.0;  // ||eta||_{L^q(Q)}
};

/// Running space-time norms; time integrals use the right-endpoint rule, so every
/// norm is nondecreasing as the window grows.
class AprioriMonitor {
 public:
  AprioriMonitor(const Problem& problem, AprioriExponents exponents);

  void start(const std::vector<double>& coeffs);
  void advance(double dt, const std::vector<double>& coeffs, const ScalarField& theta);
  AprioriNorms norms() const;

 private:
  const Problem* problem_;
  AprioriExponents e_;
  double sup_v2_ = 0.0;
  double dv_ = 0.0, v5_ = 0.0, th_ = 0.0, ga_ = 0.0, gs_ = 0.0, eta2_ = 0.0, eta4_ = 0.0, eta8_ = 0.0;
};

AprioriNorms apriori_norms(const Problem& problem, const Trajectory& traj, const AprioriExponents& e);

struct DecayMetrics {
  double v_l2 = 0.0;
  double theta_l1 = 0.0;  // ||theta - theta_hat||_{L^1}
  double g_l2 = 0.0;      // ||g(theta - theta_hat)||_{L^2}, g at level M
};

DecayMetrics decay_metrics(const Grid& grid, const std::vector<double>& coeffs,
                           const ScalarField& theta, const ScalarField& theta_hat, double M);

/// Nodal-weight form of ||t1 - t2||_1 <= sqrt(2) ||sqrt(t1) + sqrt(t2)||_2 ||g1 - g2||_2.
struct GMetricReport {
  int samples = 0;
  int violations = 0;
  double worst_ratio = 0.0;  // max lhs / rhs
};
GMetricReport check_g_metric_inequality(const Grid& grid, const ScalarField& theta_hat, double M,
                                        double mu, int samples, std::uint64_t seed);

/// One CSV row.
struct DiagnosticsRecord {
  double t = 0.0;
  double kinetic_energy = 0.0;
  double dissipation = 0.0;
  double internal_energy = 0.0;
  double entropy = 0.0;
  double entropy_production_min = 0.0;
  double min_theta_margin = 0.0;
  double energy_residual = 0.0;
  double internal_energy_residual = 0.0;
  double entropy_residual = 0.0;
  AprioriNorms apriori;
  DecayMetrics decay;
  // extras
  double chain_rule_defect = 0.0;
  double divergence_defect = 0.0;
  double min_principle_slack = 0.0;
  double state_drift = 0.0;
  double jensen_gap = 0.0;  // ln(mean theta)|Omega| - int eta, nonnegative
  int picard_iterations = 0;
  long step = 0;
};

std::vector<std::string> record_columns();
std::vector<double> record_values(const DiagnosticsRecord& r);

/// Per-step statistics accumulated between two records.
struct StepWindow {
  double max_energy_defect = 0.0;
  double max_internal_energy_residual = 0.0;
  double max_divergence_defect = 0.0;
  int max_picard_iterations = 0;
  void add(const StepReport& s);
};

/// Builds records; keeps what is needed for the per-record entropy balance.
class RecordBuilder {
 public:
  RecordBuilder(const Problem& problem, const SimulationState& initial);

  /// Call after every step.
  void step(const SimulationState& state, double dt);
  /// Record at the current state; the first call may use the initial state itself.
  DiagnosticsRecord record(const SimulationState& state, double slack);

 private:
  struct Functionals {
    double t = 0.0;
    double mass = 0.0;  // int eta b
    double flux = 0.0;  // convection + diffusion - heating - production
    double abs_flux = 0.0;
  };
  Functionals entropy_functionals(const SimulationState& state) const;
  DiagnosticsRecord base_record(const SimulationState& state) const;

  const Problem* problem_;
  ScalarField bump_;
  AprioriMonitor apriori_;
  Functionals prev_;
  StepWindow window_;
  std::vector<double> c0_;
  ScalarField theta0_;
};

/// Largest face mismatch |d eta - d theta / theta_face| / h between the two discrete forms of
/// the entropy gradient.
double chain_rule_defect(const Grid& grid, const ScalarField& theta);

}  // namespace nsf
