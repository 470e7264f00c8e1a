#include "nsf/truncation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace nsf {

void CutoffParams::validate() const {
  if (!(k > 0.0)) throw std::invalid_argument("cut-off level k must be positive");
  if (!(delta > 0.0 && delta < k)) throw std::invalid_argument("need 0 < delta < k");
  if (!(epsilon > 0.0 && epsilon < k)) throw std::invalid_argument("need 0 < epsilon < k");
  if (!(M > 0.0)) throw std::invalid_argument("truncation level M must be positive");
}

namespace {

void require_level(double k) {
  if (!(k > 0.0) || !std::isfinite(k)) throw std::invalid_argument("truncation level must be positive");
}

}  // namespace

double t_k(double k, double z) {
  require_level(k);
  if (z > k) return k;
  if (z < -k) return -k;
  return z;
}

double g_k(double k, double s) {
  require_level(k);
  const double a = std::abs(s);
  if (a <= k) return 0.5 * s * s;
  return k * a - 0.5 * k * k;
}

MollifiedCutoff::MollifiedCutoff(double k, double delta) : k_(k), delta_(delta) {
  require_level(k);
  if (!(delta > 0.0 && delta < k))
    throw std::invalid_argument("mollification radius must satisfy 0 < delta < k");
}

double MollifiedCutoff::value(double z) const {
  const double a = std::abs(z);
  if (a <= k_ - delta_) return z;
  if (a >= k_ + delta_) return z > 0.0 ? k_ : -k_;
  const double width = 2.0 * delta_;
  const double s = (a - (k_ - delta_)) / width;
  const double v = (k_ - delta_) + width * (s - s * s * s + 0.5 * s * s * s * s);
  return z > 0.0 ? v : -v;
}

double MollifiedCutoff::d1(double z) const {
  const double a = std::abs(z);
  if (a <= k_ - delta_) return 1.0;
  if (a >= k_ + delta_) return 0.0;
  const double s = (a - (k_ - delta_)) / (2.0 * delta_);
  return 1.0 - s * s * (3.0 - 2.0 * s);
}

double MollifiedCutoff::d2(double z) const {
  const double a = std::abs(z);
  if (a <= k_ - delta_ || a >= k_ + delta_) return 0.0;
  const double s = (a - (k_ - delta_)) / (2.0 * delta_);
  const double v = -6.0 * s * (1.0 - s) / (2.0 * delta_);
  return z > 0.0 ? v : -v;
}

double t_k_delta(double k, double delta, double z) { return MollifiedCutoff(k, delta).value(z); }
double t_k_delta_d1(double k, double delta, double z) { return MollifiedCutoff(k, delta).d1(z); }
double t_k_delta_d2(double k, double delta, double z) { return MollifiedCutoff(k, delta).d2(z); }

double g_continuity(double M, double theta, double theta_hat) {
  const double x = theta - theta_hat;
  const double r = std::sqrt(g_k(M, x));
  return x < 0.0 ? -r : r;
}

namespace {

double simpson_step(const std::function<double(double)>& f, double a, double b, double fa,
                    double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

// log1p(x) / x, accurate near zero.
double log1p_ratio(double x) {
  if (std::abs(x) < 1e-4) return 1.0 - x * (0.5 - x * (1.0 / 3.0 - x * (0.25 - 0.2 * x)));
  return std::log1p(x) / x;
}

// Value of K at theta -> 0+, i.e. the infimum of the attainable range.
double kirchhoff_floor(const ConductivityLaw& law, double s_ref) {
  const auto& prof = law.profile();
  switch (prof.kind()) {
    case BoundedProfile::Kind::Constant:
      return -prof.lo() * s_ref;
    case BoundedProfile::Kind::Rational:
      return kirchhoff(law, 0.0, s_ref);
    case BoundedProfile::Kind::Custom:
      return -adaptive_simpson([&](double z) { return law(z); }, 1e-300, s_ref);
  }
  return 0.0;
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double rel_tol, int max_depth) {
  if (a == b) return 0.0;
  // Start from 16 panels so a coarse first estimate cannot hide oscillations.
  constexpr int panels = 16;
  std::vector<double> x(2 * panels + 1), fx(2 * panels + 1);
  for (int k = 0; k <= 2 * panels; ++k) {
    x[k] = a + (b - a) * k / (2.0 * panels);
    fx[k] = f(x[k]);
  }
  std::vector<double> est(panels);
  double scale = 0.0;
  for (int k = 0; k < panels; ++k) {
    est[k] = (x[2 * k + 2] - x[2 * k]) / 6.0 * (fx[2 * k] + 4.0 * fx[2 * k + 1] + fx[2 * k + 2]);
    scale += std::abs(est[k]);
  }
  const double tol = rel_tol * std::max(scale, 1e-300) / panels;
  double sum = 0.0;
  for (int k = 0; k < panels; ++k)
    sum += simpson_step(f, x[2 * k], x[2 * k + 2], fx[2 * k], fx[2 * k + 1], fx[2 * k + 2], est[k], tol,
                        max_depth);
  return sum;
}

double kirchhoff(const ConductivityLaw& law, double s, double s_ref) {
  if (!(s_ref > 0.0)) throw std::invalid_argument("Kirchhoff reference must be positive");
  const auto& prof = law.profile();
  // The rational profile also accepts s = 0 so the range floor has a closed form.
  if (prof.kind() == BoundedProfile::Kind::Rational ? !(s >= 0.0) : !(s > 0.0))
    throw std::invalid_argument("Kirchhoff argument must be positive");
  switch (prof.kind()) {
    case BoundedProfile::Kind::Constant:
      return prof.lo() * (s - s_ref);
    case BoundedProfile::Kind::Rational: {
      const double d = s - s_ref;
      const double log_ratio = std::log1p(d / (1.0 + s_ref));  // log(1+s) - log(1+s_ref)
      return prof.lo() * d + (prof.hi() - prof.lo()) * (d - log_ratio);
    }
    case BoundedProfile::Kind::Custom:
      if (s >= s_ref) return adaptive_simpson([&](double z) { return law(z); }, s_ref, s);
      return -adaptive_simpson([&](double z) { return law(z); }, s, s_ref);
  }
  return 0.0;
}

double kirchhoff_secant(const ConductivityLaw& law, double a, double b) {
  const auto& prof = law.profile();
  switch (prof.kind()) {
    case BoundedProfile::Kind::Constant:
      return prof.lo();
    case BoundedProfile::Kind::Rational: {
      if (!(a > 0.0 && b > 0.0)) throw std::invalid_argument("temperature must be positive");
      // mean of theta/(1+theta) over [b, a] = 1 - (log(1+a) - log(1+b)) / (a - b)
      const double x = (a - b) / (1.0 + b);
      const double mean_inv = log1p_ratio(x) / (1.0 + b);
      return prof.lo() + (prof.hi() - prof.lo()) * (1.0 - mean_inv);
    }
    case BoundedProfile::Kind::Custom: {
      if (std::abs(a - b) <= 1e-8 * std::max(std::abs(a), std::abs(b)))
        return law(0.5 * (a + b));
      return (kirchhoff(law, a, b)) / (a - b);
    }
  }
  return prof.lo();
}

double kirchhoff_inverse(const ConductivityLaw& law, double u, double s_ref) {
  if (!(s_ref > 0.0)) throw std::invalid_argument("Kirchhoff reference must be positive");
  if (!std::isfinite(u)) throw std::invalid_argument("Kirchhoff target must be finite");
  const double floor = kirchhoff_floor(law, s_ref);
  if (!(u > floor))
    throw std::domain_error("Kirchhoff target " + std::to_string(u) +
                            " is not attainable with a positive temperature");
  const double lo_k = law.lo();
  const double hi_k = law.hi();
  double lo, hi;
  if (u >= 0.0) {
    lo = s_ref + u / hi_k;
    hi = s_ref + u / lo_k;
  } else {
    lo = std::max(s_ref + u / lo_k, 0.0);
    hi = s_ref + u / hi_k;
  }
  const double tol = 1e-12 * (1.0 + std::abs(u));
  double x = std::clamp(s_ref + u / law(s_ref), lo, hi);
  if (x <= 0.0) x = 0.5 * hi;
  for (int it = 0; it < 200; ++it) {
    const double f = kirchhoff(law, x, s_ref) - u;
    // Polish well past the acceptance tolerance; Newton converges quadratically here.
    if (std::abs(f) <= 4e-16 * (1.0 + std::abs(u))) return x;
    if (f > 0.0)
      hi = x;
    else
      lo = x;
    double next = x - f / law(x);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next <= 0.0) next = 0.5 * hi;
    if (next == x) break;
    x = next;
  }
  const double f = kirchhoff(law, x, s_ref) - u;
  if (std::abs(f) <= tol) return x;
  throw std::runtime_error("Kirchhoff inversion did not converge (residual " +
                           std::to_string(f) + ")");
}

}  // namespace nsf
