#pragma once

#include <cmath>

namespace nsf {

/// Symmetric 2x2 tensor; only the upper triangle is stored.
struct SymTensor {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;

  static constexpr SymTensor diag(double a, double b) { return {a, 0.0, b}; }

  /// Frobenius norm sqrt(sum_ij D_ij^2); the off-diagonal entry counts twice.
  double norm() const { return std::sqrt(xx * xx + 2.0 * xy * xy + yy * yy); }
  bool is_zero() const { return xx == 0.0 && xy == 0.0 && yy == 0.0; }
  bool is_finite() const {
    return std::isfinite(xx) && std::isfinite(xy) && std::isfinite(yy);
  }

  SymTensor& operator+=(const SymTensor& o) {
    xx += o.xx;
    xy += o.xy;
    yy += o.yy;
    return *this;
  }
  SymTensor& operator-=(const SymTensor& o) {
    xx -= o.xx;
    xy -= o.xy;
    yy -= o.yy;
    return *this;
  }
  SymTensor& operator*=(double s) {
    xx *= s;
    xy *= s;
    yy *= s;
    return *this;
  }
};

inline SymTensor operator+(SymTensor a, const SymTensor& b) { return a += b; }
inline SymTensor operator-(SymTensor a, const SymTensor& b) { return a -= b; }
inline SymTensor operator*(double s, SymTensor a) { return a *= s; }
inline SymTensor operator*(SymTensor a, double s) { return a *= s; }

/// Frobenius inner product A:B.
inline double double_dot(const SymTensor& a, const SymTensor& b) {
  return a.xx * b.xx + 2.0 * a.xy * b.xy + a.yy * b.yy;
}

}  // namespace nsf
