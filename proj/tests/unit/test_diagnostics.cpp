#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "nsf/diagnostics.hpp"
#include "nsf/error.hpp"
#include "nsf/run.hpp"

using namespace nsf;

namespace {

SimulationConfig diffusion_config() {
  SimulationConfig cfg;
  cfg.nx = cfg.ny = 15;
  cfg.n_modes = 1;
  cfg.kappa_profile = "rational";
  cfg.theta_b = {SideData{3, 0}, SideData{4, 0}, SideData{3, 1}, SideData{3, 1}};
  cfg.theta0.kind = TemperatureSpec::Kind::Bump;
  cfg.theta0.bump_amplitude = 1.0;
  cfg.theta0.bump_width = 0.45;
  cfg.dt = 0.002;
  cfg.t_end = 0.1;
  cfg.write_snapshots = false;
  return cfg;
}

}  // namespace

TEST(Entropy, LogOfTemperature) {
  const Grid g(3, 3);
  ScalarField t(g, std::numbers::e);
  t(1, 1) = 1.0;
  const auto eta = entropy_field(t);
  EXPECT_NEAR(eta(0, 0), 1.0, 1e-15);
  EXPECT_EQ(eta(1, 1), 0.0);
  t(2, 2) = 0.0;
  EXPECT_THROW(entropy_field(t), std::domain_error);
}

TEST(Entropy, ChainRuleDefectVanishesForConstants) {
  const Grid g(6, 6);
  EXPECT_EQ(chain_rule_defect(g, ScalarField(g, 2.0)), 0.0);
}

TEST(BumpTest, UnitHeightCompactSupport) {
  const Bump b{0.5, 0.25};
  EXPECT_NEAR(b.value(0.5), 1.0, 1e-15);
  EXPECT_EQ(b.value(0.2), 0.0);
  EXPECT_EQ(b.value(0.8), 0.0);
  EXPECT_NEAR(b.d1(0.5), 0.0, 1e-15);
  const double h = 1e-6;
  EXPECT_NEAR(b.d1(0.4), (b.value(0.4 + h) - b.value(0.4 - h)) / (2 * h), 1e-7);
}

TEST(BumpTest, SupportTouchingWallRejected) {
  TestFunction phi;
  phi.x = {0.2, 0.3};
  EXPECT_ANY_THROW(phi.spatial(Grid(8, 8)));
}

TEST(Records, ColumnsMatchValues) {
  EXPECT_EQ(record_columns().size(), record_values(DiagnosticsRecord{}).size());
  EXPECT_EQ(record_columns().front(), "t");
}

TEST(Apriori, ExponentRangesValidated) {
  AprioriExponents e;
  e.validate();
  e.r = 2.0;
  EXPECT_THROW(e.validate(), ConfigError);
}

TEST(Decay, ZeroAtEquilibrium) {
  const Grid g(8, 8);
  const ScalarField th(g, 2.0);
  const auto m = decay_metrics(g, std::vector<double>(3, 0.0), th, th, 10.0);
  EXPECT_EQ(m.v_l2, 0.0);
  EXPECT_EQ(m.theta_l1, 0.0);
  EXPECT_EQ(m.g_l2, 0.0);
}

TEST(Decay, GMetricInequalityHolds) {
  const Grid g(10, 10);
  ScalarField th(g, 1.0);
  for (int j = 0; j < g.py(); ++j)
    for (int i = 0; i < g.px(); ++i) th(i, j) = 1.0 + g.x(i);
  const auto r = check_g_metric_inequality(g, th, 8.0, 1.0, 200, 3);
  EXPECT_EQ(r.violations, 0);
  EXPECT_LE(r.worst_ratio, 1.0);
}

TEST(WeakForms, StationaryResidualsVanish) {
  auto cfg = diffusion_config();
  cfg.theta0.kind = TemperatureSpec::Kind::Equilibrium;
  Problem pb(cfg);
  RunOptions opts;
  opts.keep_trajectory = true;
  const auto r = run(pb, opts);
  ASSERT_EQ(r.status, RunStatus::Clean);
  TestFunction phi;
  phi.x = {0.5, 0.35};
  phi.y = {0.5, 0.35};
  EXPECT_LT(std::abs(weak_residual_internal_energy(pb, r.trajectory, phi).residual), 1e-12);
  EXPECT_LT(std::abs(weak_residual_entropy(pb, r.trajectory, phi).residual), 1e-12);
  EXPECT_LT(std::abs(weak_residual_momentum(pb, r.trajectory, 0).residual), 1e-14);
}

TEST(WeakForms, InternalEnergyExactForConstantKappa) {
  // With a time-independent test function and a temperature-independent conductivity the
  // balance is the scheme summed over the steps.
  auto cfg = diffusion_config();
  cfg.kappa_profile = "constant";
  Problem pb(cfg);
  RunOptions opts;
  opts.keep_trajectory = true;
  const auto r = run(pb, opts);
  ASSERT_EQ(r.status, RunStatus::Clean);
  TestFunction phi;
  phi.x = {0.5, 0.35};
  phi.y = {0.5, 0.35};
  EXPECT_LT(weak_residual_internal_energy(pb, r.trajectory, phi).normalized, 1e-12);
}

TEST(WeakForms, InternalEnergySmallAndEntropyDetectorSensitive) {
  auto cfg = diffusion_config();
  Problem pb(cfg);
  RunOptions opts;
  opts.keep_trajectory = true;
  const auto r = run(pb, opts);
  ASSERT_EQ(r.status, RunStatus::Clean);
  TestFunction phi;
  phi.x = {0.5, 0.35};
  phi.y = {0.5, 0.35};
  // The scheme lags the conductivity by one step, the residual does not: an O(dt) gap.
  EXPECT_LT(weak_residual_internal_energy(pb, r.trajectory, phi).normalized, 1e-3);
  phi.t = Bump{0.0, 0.1};
  const double base = weak_residual_entropy(pb, r.trajectory, phi).normalized;
  EntropyResidualOptions eo;
  eo.eta_scale = 1.01;
  EXPECT_GT(weak_residual_entropy(pb, r.trajectory, phi, eo).normalized, 5 * base);
}

TEST(WeakForms, TruncatedIdentityExactAboveRange) {
  auto cfg = diffusion_config();
  Problem pb(cfg);
  RunOptions opts;
  opts.keep_trajectory = true;
  const auto r = run(pb, opts);
  ASSERT_EQ(r.status, RunStatus::Clean);
  EXPECT_LE(std::abs(truncated_energy_identity(pb, r.trajectory, 10.0, 0.5).residual), 1e-12);
  EXPECT_ANY_THROW(truncated_energy_identity(pb, r.trajectory, 6.0, 0.5));
}

TEST(RunRecords, JensenGapAndProductionSign) {
  auto cfg = diffusion_config();
  cfg.v0.kind = VelocitySpec::Kind::Mode;
  cfg.v0.amplitude = 0.5;
  cfg.n_modes = 3;
  const auto r = run(cfg);
  ASSERT_EQ(r.status, RunStatus::Clean);
  for (const auto& rec : r.records) {
    EXPECT_GE(rec.jensen_gap, -1e-12);
    EXPECT_GE(rec.entropy_production_min, -1e-12);
    EXPECT_GE(rec.min_theta_margin, -rec.min_principle_slack);
  }
  EXPECT_TRUE(r.invariants.at("apriori_monotone").passed);
}
