#include <gtest/gtest.h>

#include <cmath>

#include "nsf/commands.hpp"
#include "nsf/config.hpp"
#include "nsf/error.hpp"
#include "nsf/run.hpp"
#include "nsf/solver.hpp"
#include "nsf/truncation.hpp"

using namespace nsf;

namespace {

SimulationConfig small_config() {
  SimulationConfig cfg;
  cfg.nx = cfg.ny = 16;
  cfg.n_modes = 4;
  cfg.kappa_profile = "rational";
  cfg.theta_b = {SideData{1, 0}, SideData{2, 0}, SideData{1, 1}, SideData{1, 1}};
  cfg.dt = 0.01;
  cfg.t_end = 0.1;
  cfg.write_snapshots = false;
  return cfg;
}

}  // namespace

TEST(Operators, DiffusionIsSymmetricMMatrix) {
  const Grid g(8, 6);
  ScalarField theta(g, 1.0);
  for (int j = 0; j < g.py(); ++j)
    for (int i = 0; i < g.px(); ++i) theta(i, j) = 1.0 + g.x(i) * g.y(j);
  const auto kf = kirchhoff_face_conductivity(g, ConductivityLaw::rational(1.0, 2.0), theta);
  const auto a = diffusion_operator(g, kf);
  EXPECT_TRUE(a.is_m_matrix());
  EXPECT_TRUE(a.is_symmetric());
  // Rows away from the ring annihilate constants.
  EXPECT_NEAR(a.row_sums()[a.index(4, 3)], 0.0, 1e-12);
}

TEST(Operators, KirchhoffFaceFluxIsKirchhoffDifference) {
  const Grid g(4, 4);
  const auto law = ConductivityLaw::rational(1.0, 2.0);
  ScalarField theta(g, 1.0);
  theta(1, 1) = 3.0;
  const auto kf = kirchhoff_face_conductivity(g, law, theta);
  EXPECT_NEAR(kf.x(1, 1) * (theta(2, 1) - theta(1, 1)), kirchhoff(law, 1.0, 1.0) - kirchhoff(law, 3.0, 1.0),
              1e-14);
}

TEST(Operators, StreamFluxesAreDiscretelyDivergenceFree) {
  const Grid g(20, 20);
  const VelocityBasis b(g, 6);
  const std::vector<double> c = {1.0, -0.5, 0.3, 0.2, -0.7, 0.1};
  const auto f = stream_face_fluxes(g, b, c);
  double worst = 0.0;
  for (double d : divergence_defect(g, f)) worst = std::max(worst, std::abs(d));
  EXPECT_LT(worst, 1e-12);
  const auto conv = convection_operator(g, f);
  for (double r : conv.row_sums()) EXPECT_NEAR(r, 0.0, 1e-11);

  double point = 0.0;
  for (double d : divergence_defect(g, point_face_fluxes(g, b, c))) point = std::max(point, std::abs(d));
  EXPECT_GT(point, 1e3 * worst);
}

TEST(Operators, UpwindConvectionHasNonpositiveOffDiagonals) {
  const Grid g(12, 12);
  const VelocityBasis b(g, 3);
  const auto conv = convection_operator(g, stream_face_fluxes(g, b, std::vector<double>{2.0, -1.0, 0.5}));
  for (std::size_t k = 0; k < conv.c.size(); ++k) {
    EXPECT_LE(conv.e[k], 0.0);
    EXPECT_LE(conv.w[k], 0.0);
    EXPECT_LE(conv.n[k], 0.0);
    EXPECT_LE(conv.s[k], 0.0);
  }
}

TEST(Stepping, EquilibriumIsAFixedPoint) {
  auto cfg = small_config();
  Problem pb(cfg);
  const auto s0 = initial_state(pb);
  const auto s1 = coupled_step(pb, s0, cfg.dt);
  for (double c : s1.velocity.coeffs) EXPECT_EQ(c, 0.0);
  for (int j = 0; j < pb.grid().py(); ++j)
    for (int i = 0; i < pb.grid().px(); ++i) EXPECT_NEAR(s1.theta(i, j), s0.theta(i, j), 1e-12);
}

TEST(Stepping, KineticEnergyDecaysAndHeatingMatchesDissipation) {
  auto cfg = small_config();
  cfg.v0.kind = VelocitySpec::Kind::Mode;
  cfg.v0.mode = 2;
  cfg.v0.amplitude = 1.0;
  Problem pb(cfg);
  auto s = initial_state(pb);
  EXPECT_NEAR(s.velocity.kinetic_energy(), 0.5, 1e-14);
  for (int k = 0; k < 5; ++k) {
    const double e0 = s.velocity.kinetic_energy();
    s = coupled_step(pb, s, cfg.dt);
    EXPECT_LT(s.velocity.kinetic_energy(), e0);
    EXPECT_LT(std::abs(s.last.energy_defect), 1e-12);
    double heat = 0.0;
    const Grid& g = pb.grid();
    for (int j = 1; j <= g.ny(); ++j)
      for (int i = 1; i <= g.nx(); ++i) heat += g.cv_area() * s.heating(i, j);
    EXPECT_NEAR(heat, s.last.dissipation, 1e-12 * (1 + s.last.dissipation));
    EXPECT_GE(s.theta.min(), pb.mu() - s.last.min_principle_slack - 1e-14);
  }
}

TEST(Stepping, MomentumStepOfZeroIsZero) {
  auto cfg = small_config();
  Problem pb(cfg);
  VelocityState v;
  v.coeffs.assign(4, 0.0);
  const auto r = momentum_step(pb, v, pb.theta_hat(), 0.1);
  for (double c : r.velocity.coeffs) EXPECT_EQ(c, 0.0);
}

TEST(InitialData, VortexProjectionKeepsEnergyBounded) {
  const Grid g(24, 24);
  const VelocityBasis b(g, 6);
  VelocitySpec spec;
  spec.kind = VelocitySpec::Kind::Field;
  spec.field = polynomial_vortex(1.0, 1.0, 1.0);
  const auto v = project_initial_velocity(b, g, spec);
  double field_l2 = 0.0;
  for (const auto& q : g.quad_points()) {
    const Vec2 u = spec.field(q.x, q.y);
    field_l2 += q.w * (u.x * u.x + u.y * u.y);
  }
  EXPECT_LE(v.l2_norm(), std::sqrt(field_l2) * (1 + 1e-12));
  EXPECT_GT(v.l2_norm(), 0.5 * std::sqrt(field_l2));
}

TEST(InitialData, ZeroTemperatureRejectedWithMuMessage) {
  auto cfg = small_config();
  cfg.theta0.kind = TemperatureSpec::Kind::Constant;
  cfg.theta0.value = 0.0;
  const auto r = run(cfg);
  EXPECT_EQ(r.status, RunStatus::ConfigFailure);
  EXPECT_NE(r.message.find("mu"), std::string::npos) << r.message;
}

TEST(InitialData, FloorClipsAndReportsChange) {
  auto cfg = small_config();
  cfg.theta0.kind = TemperatureSpec::Kind::Bump;
  cfg.theta0.bump_amplitude = -0.9;
  cfg.theta0.floor = 1.0;
  Problem pb(cfg);
  const auto r = regularize_initial_temperature(cfg.theta0, pb);
  EXPECT_GE(r.theta.min(), 1.0);
  EXPECT_GT(r.l1_change, 0.0);
}

TEST(Runs, Deterministic) {
  auto cfg = small_config();
  cfg.v0.kind = VelocitySpec::Kind::Random;
  cfg.v0.energy = 0.3;
  cfg.v0.seed = 42;
  const auto a = run(cfg);
  const auto b = run(cfg);
  ASSERT_EQ(a.status, RunStatus::Clean);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t k = 0; k < a.records.size(); ++k)
    EXPECT_EQ(record_values(a.records[k]), record_values(b.records[k]));
  EXPECT_EQ(a.final_state->velocity.coeffs, b.final_state->velocity.coeffs);
}

TEST(Runs, RationalKappaManufacturedSpatialOrder) {
  RawConfig raw = load_config(std::string(NSF_CONFIGS_DIR) + "/mms_space.cfg");
  apply_override(raw, "kappa.profile=rational");
  apply_override(raw, "run.t_end=0.125");
  const auto rep = refinement_ladder(to_simulation_config(raw), to_study_spec(raw), 3);
  EXPECT_TRUE(rep.monotone);
  EXPECT_GE(rep.min_order, 1.8);
}
