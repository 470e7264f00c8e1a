#pragma once

#include <functional>

#include "nsf/constitutive.hpp"

namespace nsf {

/// Levels used by the cut-off toolbox.
struct CutoffParams {
  double k = 1.0;        // truncation level
  double delta = 0.1;    // mollification half-width, 0 < delta < k
  double M = 10.0;       // large truncation level
  double epsilon = 0.1;  // small comparison level, 0 < epsilon < k

  void validate() const;
};

/// sign(z) min(|z|, k).
double t_k(double k, double z);

/// Primitive of t_k vanishing at zero: s^2/2 for |s| <= k, k|s| - k^2/2 otherwise.
double g_k(double k, double s);

/// C^2 smoothing of t_k on the band k-delta <= |z| <= k+delta.
///
/// Inside the band, with s = (|z| - (k-delta)) / (2 delta), the slope is
/// 1 - (3 s^2 - 2 s^3), so the curvature -6 s (1-s) / (2 delta) vanishes at both
/// band edges and is nonpositive in between. Outside the band the value is the
/// t_k branch itself. The function is odd.
class MollifiedCutoff {
 public:
  MollifiedCutoff(double k, double delta);

  double k() const { return k_; }
  double delta() const { return delta_; }

  double value(double z) const;
  double d1(double z) const;
  double d2(double z) const;

  /// sup |d2| * delta for this blend.
  static constexpr double curvature_constant = 0.75;

 private:
  double k_;
  double delta_;
};

double t_k_delta(double k, double delta, double z);
double t_k_delta_d1(double k, double delta, double z);
double t_k_delta_d2(double k, double delta, double z);

/// sign(theta - theta_hat) sqrt(G_M(theta - theta_hat)).
double g_continuity(double M, double theta, double theta_hat);

/// Adaptive Simpson quadrature of f on [a, b] to the given relative tolerance.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double rel_tol = 1e-12, int max_depth = 50);

/// K(s) = integral of kappa from s_ref to s. Closed form for built-in profiles.
double kirchhoff(const ConductivityLaw& law, double s, double s_ref);

/// Solves K(theta) = u for theta > 0 to |K(theta) - u| <= 1e-12 (1 + |u|).
/// Throws std::domain_error when u is below the range attained for theta > 0.
double kirchhoff_inverse(const ConductivityLaw& law, double u, double s_ref);

/// (K(a) - K(b)) / (a - b): the mean of kappa over [b, a]; kappa(a) when a == b.
double kirchhoff_secant(const ConductivityLaw& law, double a, double b);

}  // namespace nsf
