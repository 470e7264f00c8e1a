#include "nsf/basis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace nsf {

ModeSample& ModeSample::axpy(double a, const ModeSample& o) {
  u += a * o.u;
  v += a * o.v;
  ux += a * o.ux;
  uy += a * o.uy;
  vx += a * o.vx;
  vy += a * o.vy;
  psi += a * o.psi;
  return *this;
}

std::vector<ModeIndex> total_degree_modes(int count) {
  std::vector<ModeIndex> out;
  for (int degree = 2; static_cast<int>(out.size()) < count; ++degree)
    for (int m = 1; m < degree && static_cast<int>(out.size()) < count; ++m)
      out.push_back({m, degree - m});
  return out;
}

ModeSample VelocityBasis::raw(std::size_t k, double x, double y) const {
  const double a = modes_[k].m * std::numbers::pi / lx_;
  const double b = modes_[k].n * std::numbers::pi / ly_;
  const double sa = std::sin(a * x), sb = std::sin(b * y);
  // f = sin^2, f' = a sin(2ax), f'' = 2 a^2 cos(2ax)
  const double fx = sa * sa, fx1 = a * std::sin(2.0 * a * x), fx2 = 2.0 * a * a * std::cos(2.0 * a * x);
  const double fy = sb * sb, fy1 = b * std::sin(2.0 * b * y), fy2 = 2.0 * b * b * std::cos(2.0 * b * y);
  ModeSample s;
  s.psi = fx * fy;
  s.u = fx * fy1;
  s.v = -fx1 * fy;
  s.ux = fx1 * fy1;
  s.uy = fx * fy2;
  s.vx = -fx2 * fy;
  s.vy = -s.ux;
  return s;
}

VelocityBasis::VelocityBasis(const Grid& grid, int n_modes)
    : nx_(grid.nx()), ny_(grid.ny()), lx_(grid.lx()), ly_(grid.ly()) {
  if (n_modes < 1) throw std::invalid_argument("basis needs at least one mode");
  modes_ = total_degree_modes(n_modes);
  const std::size_t n = modes_.size();
  const auto& qp = grid.quad_points();
  const std::size_t nq = qp.size();

  quad_w_.resize(nq);
  std::vector<ModeSample> raw_q(nq * n);
  for (std::size_t q = 0; q < nq; ++q) {
    quad_w_[q] = qp[q].w;
    for (std::size_t k = 0; k < n; ++k) raw_q[q * n + k] = raw(k, qp[q].x, qp[q].y);
  }

  auto inner = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t q = 0; q < nq; ++q)
      s += quad_w_[q] * (a[2 * q] * b[2 * q] + a[2 * q + 1] * b[2 * q + 1]);
    return s;
  };

  // Modified Gram-Schmidt, twice, on the velocity values; coeff_ tracks the
  // combination of raw modes so modes can be evaluated off the quadrature points.
  coeff_.assign(n * n, 0.0);
  std::vector<std::vector<double>> vals(n, std::vector<double>(2 * nq));
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t q = 0; q < nq; ++q) {
      vals[k][2 * q] = raw_q[q * n + k].u;
      vals[k][2 * q + 1] = raw_q[q * n + k].v;
    }
    coeff_[k * n + k] = 1.0;
    const double norm0 = std::sqrt(inner(vals[k], vals[k]));
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t l = 0; l < k; ++l) {
        const double proj = inner(vals[k], vals[l]);
        for (std::size_t q = 0; q < 2 * nq; ++q) vals[k][q] -= proj * vals[l][q];
        for (std::size_t c = 0; c <= l; ++c) coeff_[k * n + c] -= proj * coeff_[l * n + c];
      }
    const double norm = std::sqrt(inner(vals[k], vals[k]));
    if (!(norm > 1e-10 * norm0) || !(norm0 > 0.0))
      throw std::runtime_error("basis is rank deficient at mode " + std::to_string(k) + " (m=" +
                               std::to_string(modes_[k].m) + ", n=" + std::to_string(modes_[k].n) +
                               ")");
    for (std::size_t q = 0; q < 2 * nq; ++q) vals[k][q] /= norm;
    for (std::size_t c = 0; c <= k; ++c) coeff_[k * n + c] /= norm;
  }

  quad_.assign(nq * n, ModeSample{});
  for (std::size_t q = 0; q < nq; ++q)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k <= j; ++k) quad_[q * n + j].axpy(coeff_[j * n + k], raw_q[q * n + k]);

  const auto gram = gram_matrix();
  gram_defect_ = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      gram_defect_ = std::max(gram_defect_, std::abs(gram[i * n + j] - (i == j ? 1.0 : 0.0)));

  dual_stride_ = static_cast<std::size_t>(nx_ + 1) * (ny_ + 1);
  dual_psi_.assign(n * dual_stride_, 0.0);
  for (int J = 0; J <= ny_; ++J)
    for (int I = 0; I <= nx_; ++I) {
      const double x = (I + 0.5) * grid.hx();
      const double y = (J + 0.5) * grid.hy();
      for (std::size_t k = 0; k < n; ++k) {
        const double psi = raw(k, x, y).psi;
        for (std::size_t j = k; j < n; ++j)
          dual_psi_[j * dual_stride_ + static_cast<std::size_t>(J) * (nx_ + 1) + I] +=
              coeff_[j * n + k] * psi;
      }
    }
}

std::vector<double> VelocityBasis::gram_matrix() const {
  const std::size_t n = modes_.size();
  std::vector<double> g(n * n, 0.0);
  for (std::size_t q = 0; q < quad_w_.size(); ++q)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j <= i; ++j) {
        const auto& a = quad_[q * n + i];
        const auto& b = quad_[q * n + j];
        g[i * n + j] += quad_w_[q] * (a.u * b.u + a.v * b.v);
      }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) g[j * n + i] = g[i * n + j];
  return g;
}

ModeSample VelocityBasis::eval_mode(int j, double x, double y) const {
  if (j < 0 || j >= size()) throw std::out_of_range("mode index out of range");
  const std::size_t n = modes_.size();
  ModeSample s;
  for (std::size_t k = 0; k <= static_cast<std::size_t>(j); ++k)
    s.axpy(coeff_[static_cast<std::size_t>(j) * n + k], raw(k, x, y));
  return s;
}

double VelocityState::kinetic_energy() const {
  double s = 0.0;
  for (double c : coeffs) s += c * c;
  return 0.5 * s;
}

double VelocityState::l2_norm() const { return std::sqrt(2.0 * kinetic_energy()); }

ModeSample eval_field(const VelocityBasis& basis, std::span<const double> coeffs, double x,
                      double y) {
  if (static_cast<int>(coeffs.size()) != basis.size())
    throw std::invalid_argument("coefficient vector does not match the basis dimension");
  ModeSample s;
  for (int j = 0; j < basis.size(); ++j)
    if (coeffs[static_cast<std::size_t>(j)] != 0.0)
      s.axpy(coeffs[static_cast<std::size_t>(j)], basis.eval_mode(j, x, y));
  return s;
}

std::vector<Vec2> eval_velocity(const VelocityBasis& basis, const VelocityState& state,
                                std::span<const Vec2> points) {
  std::vector<Vec2> out;
  out.reserve(points.size());
  for (const auto& p : points) {
    const auto s = eval_field(basis, state.coeffs, p.x, p.y);
    out.push_back({s.u, s.v});
  }
  return out;
}

std::vector<SymTensor> eval_sym_gradient(const VelocityBasis& basis, const VelocityState& state,
                                         std::span<const Vec2> points) {
  std::vector<SymTensor> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(eval_field(basis, state.coeffs, p.x, p.y).sym_gradient());
  return out;
}

}  // namespace nsf
