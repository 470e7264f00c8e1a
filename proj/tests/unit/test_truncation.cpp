#include <gtest/gtest.h>

#include <cmath>

#include "nsf/truncation.hpp"

using namespace nsf;

TEST(Cutoff, TkValues) {
  EXPECT_EQ(t_k(2.0, 3.0), 2.0);
  EXPECT_EQ(t_k(2.0, -3.0), -2.0);
  EXPECT_EQ(t_k(2.0, 1.25), 1.25);
  EXPECT_EQ(t_k(2.0, 0.0), 0.0);
}

TEST(Cutoff, GkValues) {
  EXPECT_EQ(g_k(2.0, 4.0), 6.0);
  EXPECT_EQ(g_k(2.0, -4.0), 6.0);
  EXPECT_EQ(g_k(2.0, 1.0), 0.5);
  EXPECT_EQ(g_k(2.0, 2.0), 2.0);
}

// Independent construction of the smoothed cut-off: integrate the slope
// 1 - (3 s^2 - 2 s^3) across the band with a fine midpoint rule.
double blend_oracle(double k, double delta, double z) {
  const double a = std::abs(z);
  if (a <= k - delta) return z;
  const double top = std::min(a, k + delta);
  const int n = 200000;
  const double h = (top - (k - delta)) / n;
  double acc = k - delta;
  for (int i = 0; i < n; ++i) {
    const double s = ((k - delta) + (i + 0.5) * h - (k - delta)) / (2 * delta);
    acc += h * (1.0 - (3 * s * s - 2 * s * s * s));
  }
  return std::copysign(acc, z);
}

TEST(Mollified, MatchesIntegratedSlope) {
  const double k = 2.0, delta = 0.5;
  for (double z : {0.3, 1.5, 1.6, 1.9, 2.0, 2.2, 2.49, 2.5, 3.0, -1.8, -2.3})
    EXPECT_NEAR(t_k_delta(k, delta, z), blend_oracle(k, delta, z), 1e-10) << "z = " << z;
}

TEST(Mollified, ReachesKAtBandTop) {
  EXPECT_NEAR(t_k_delta(2.0, 0.5, 2.5), 2.0, 1e-15);
  EXPECT_EQ(t_k_delta(2.0, 0.5, 10.0), 2.0);
  EXPECT_EQ(t_k_delta(2.0, 0.5, 1.5), 1.5);
}

TEST(Mollified, DerivativesContinuousAtBandEdges) {
  const double k = 1.0, delta = 0.25, e = 1e-9;
  for (double edge : {k - delta, k + delta}) {
    EXPECT_NEAR(t_k_delta_d1(k, delta, edge - e), t_k_delta_d1(k, delta, edge + e), 1e-7);
    EXPECT_NEAR(t_k_delta_d2(k, delta, edge - e), t_k_delta_d2(k, delta, edge + e), 1e-6);
  }
}

TEST(Mollified, CurvatureConstant) {
  // Peak of 6 s (1 - s) / (2 delta) at s = 1/2 is 0.75 / delta.
  const double k = 3.0, delta = 0.4;
  EXPECT_NEAR(std::abs(t_k_delta_d2(k, delta, k)) * delta, 0.75, 1e-14);
  EXPECT_EQ(MollifiedCutoff::curvature_constant, 0.75);
}

TEST(Mollified, InvalidParametersRejected) {
  CutoffParams p;
  p.delta = 2.0;
  EXPECT_ANY_THROW(p.validate());
  EXPECT_ANY_THROW(MollifiedCutoff(1.0, 0.0));
}

TEST(GFunction, SquareIsPrimitive) {
  for (double th : {0.2, 1.0, 3.0, 15.0}) {
    const double g = g_continuity(4.0, th, 2.0);
    EXPECT_NEAR(g * g, g_k(4.0, th - 2.0), 1e-14);
    EXPECT_EQ(std::signbit(g), th < 2.0);
  }
}

TEST(GFunction, SlopeBoundHoldsWhenMIsLarge) {
  // M >= max(2 mu, theta_hat - mu): |g(a) - g(b)| >= sqrt(mu) / sqrt(2 max(a, b)) |a - b|.
  const double mu = 1.0, th = 1.5, M = 4.0;
  for (double a = 1.0; a < 12.0; a += 0.37) {
    const double b = a + 0.01;
    const double slope = (g_continuity(M, b, th) - g_continuity(M, a, th)) / 0.01;
    EXPECT_GE(slope, std::sqrt(mu) / std::sqrt(2 * b) - 1e-9) << "a = " << a;
  }
}

TEST(GFunction, SlopeBoundCanFailForSmallM) {
  // M = 1, mu = theta_hat = 1: at theta = 10 the slope is sqrt(M)/(2 sqrt(9 - 0.5)), below
  // sqrt(1)/sqrt(20).
  const double h = 1e-6;
  const double slope = (g_continuity(1.0, 10.0 + h, 1.0) - g_continuity(1.0, 10.0 - h, 1.0)) / (2 * h);
  EXPECT_NEAR(slope, 0.5 / std::sqrt(8.5), 1e-8);
  EXPECT_LT(slope, 1.0 / std::sqrt(20.0));
}

TEST(Kirchhoff, RationalClosedForm) {
  const auto law = ConductivityLaw::rational(1.0, 2.0);
  // K(s) = lo (s - r) + (hi - lo) ((s - r) - ln((1 + s) / (1 + r))).
  const double s = 3.0, r = 1.0;
  EXPECT_NEAR(kirchhoff(law, s, r), 2.0 + (2.0 - std::log(2.0)), 1e-14);
}

TEST(Kirchhoff, RoundTrip) {
  const auto law = ConductivityLaw::rational(0.5, 4.0);
  for (double s : {0.05, 0.7, 1.0, 2.5, 40.0}) {
    const double u = kirchhoff(law, s, 1.0);
    EXPECT_NEAR(kirchhoff_inverse(law, u, 1.0), s, 1e-10 * s);
  }
}

TEST(Kirchhoff, CustomProfileUsesQuadrature) {
  const auto law = ConductivityLaw(BoundedProfile::custom([](double t) { return 2.0 + std::sin(t); }, 1.0, 3.0));
  const double exact = 2.0 * (3.0 - 1.0) - (std::cos(3.0) - std::cos(1.0));
  EXPECT_NEAR(kirchhoff(law, 3.0, 1.0), exact, 1e-11);
}

TEST(Kirchhoff, SecantIsMeanConductivity) {
  const auto law = ConductivityLaw::rational(1.0, 2.0);
  EXPECT_DOUBLE_EQ(kirchhoff_secant(law, 1.0, 1.0), 1.5);
  EXPECT_NEAR(kirchhoff_secant(law, 3.0, 1.0), kirchhoff(law, 3.0, 1.0) / 2.0, 1e-15);
}

TEST(Kirchhoff, InverseBelowRangeThrows) {
  const auto law = ConductivityLaw::constant(1.0);
  EXPECT_THROW(kirchhoff_inverse(law, -5.0, 1.0), std::domain_error);
}

TEST(Quadrature, AdaptiveSimpsonOnOscillatoryIntegrand) {
  const double v = adaptive_simpson([](double x) { return std::sin(20 * x) * std::sin(20 * x); }, 0.0, 1.0);
  EXPECT_NEAR(v, 0.5 - std::sin(40.0) / 80.0, 1e-11);
}
