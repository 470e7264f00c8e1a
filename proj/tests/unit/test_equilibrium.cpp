#include <gtest/gtest.h>

#include <random>

#include "nsf/equilibrium.hpp"
#include "nsf/error.hpp"
#include "nsf/truncation.hpp"

using namespace nsf;

TEST(SideDataParse, AffineForms) {
  const auto a = SideData::parse("3 - 0.5*s");
  EXPECT_EQ(a.a, 3.0);
  EXPECT_EQ(a.b, -0.5);
  const auto b = SideData::parse("s");
  EXPECT_EQ(b.a, 0.0);
  EXPECT_EQ(b.b, 1.0);
  const auto c = SideData::parse("-s+4");
  EXPECT_EQ(c.a, 4.0);
  EXPECT_EQ(c.b, -1.0);
  EXPECT_EQ(SideData::parse("2").a, 2.0);
}

TEST(SideDataParse, RejectsNonAffine) {
  EXPECT_THROW(SideData::parse("s*s"), ConfigError);
  EXPECT_THROW(SideData::parse(""), ConfigError);
  EXPECT_THROW(SideData::parse("1+x"), ConfigError);
}

TEST(Boundary, CornersAverageAdjacentSides) {
  const Grid g(4, 4);
  const BoundaryData bd{SideData{1, 0}, SideData{3, 0}, SideData{5, 0}, SideData{7, 0}};
  const auto f = bd.ring_field(g, 0.0);
  EXPECT_EQ(f(0, 0), 3.0);  // left, bottom
  EXPECT_EQ(f(5, 5), 5.0);  // right, top
  EXPECT_EQ(f(0, 2), 1.0);
  EXPECT_EQ(f(2, 2), 0.0);
}

TEST(ThetaHat, ConstantKappaLinearProfile) {
  const Grid g(20, 20);
  EquilibriumProblem pb;
  pb.grid = &g;
  pb.law = ConductivityLaw::constant(2.0);
  pb.boundary = {SideData{1, 0}, SideData{2, 0}, SideData{1, 1}, SideData{1, 1}};
  const auto sol = solve_theta_hat(pb);
  for (int j = 0; j < g.py(); ++j)
    for (int i = 0; i < g.px(); ++i) EXPECT_NEAR(sol.theta_hat(i, j), 1.0 + g.x(i), 1e-11);
  EXPECT_LT(sol.linear_residual, 1e-12);
}

TEST(ThetaHat, RationalKappaIsKirchhoffHarmonic) {
  const Grid g(24, 24);
  EquilibriumProblem pb;
  pb.grid = &g;
  pb.law = ConductivityLaw::rational(1.0, 3.0);
  pb.boundary = {SideData{1, 0}, SideData{4, 0}, SideData{1, 3}, SideData{2, 1}};
  const auto sol = solve_theta_hat(pb);
  EXPECT_LT(sol.kirchhoff_defect, 1e-10);
  EXPECT_GE(sol.theta_hat.min(), sol.theta_hat.boundary_min() - 1e-12);
  EXPECT_LE(sol.theta_hat.max(), sol.theta_hat.boundary_max() + 1e-12);
}

TEST(ThetaHat, UniformDataGivesUniformField) {
  const Grid g(10, 10);
  EquilibriumProblem pb;
  pb.grid = &g;
  pb.law = ConductivityLaw::rational(1.0, 2.0);
  pb.boundary = BoundaryData::uniform(2.5);
  const auto sol = solve_theta_hat(pb);
  EXPECT_NEAR(sol.theta_hat.min(), 2.5, 1e-13);
  EXPECT_NEAR(sol.theta_hat.max(), 2.5, 1e-13);
}

TEST(ThetaHat, NonpositiveBoundaryRejected) {
  const Grid g(6, 6);
  EquilibriumProblem pb;
  pb.grid = &g;
  pb.boundary = {SideData{1, 0}, SideData{1, 0}, SideData{0.5, -1}, SideData{1, 0}};
  EXPECT_THROW(solve_theta_hat(pb), ConfigError);
}

TEST(Mu, MinimumOverBothFields) {
  const Grid g(4, 4);
  ScalarField a(g, 2.0), b(g, 3.0);
  b(2, 2) = 0.5;
  EXPECT_EQ(compute_mu(a, b), 0.5);
  b(2, 2) = 0.0;
  try {
    compute_mu(a, b);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("mu"), std::string::npos);
  }
}
