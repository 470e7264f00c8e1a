#include "nsf/scalar_ops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nsf/truncation.hpp"

namespace nsf {

double FaceField::max_abs() const {
  double m = 0.0;
  for (double v : xf_) m = std::max(m, std::abs(v));
  for (double v : yf_) m = std::max(m, std::abs(v));
  return m;
}

Stencil5::Stencil5(const Grid& grid)
    : nx(grid.nx()),
      ny(grid.ny()),
      c(grid.interior_count(), 0.0),
      e(c),
      w(c),
      n(c),
      s(c) {}

Stencil5& Stencil5::operator+=(const Stencil5& o) {
  if (o.nx != nx || o.ny != ny) throw std::invalid_argument("stencil shapes differ");
  for (std::size_t k = 0; k < c.size(); ++k) {
    c[k] += o.c[k];
    e[k] += o.e[k];
    w[k] += o.w[k];
    n[k] += o.n[k];
    s[k] += o.s[k];
  }
  return *this;
}

void Stencil5::shift(double value) {
  for (double& v : c) v += value;
}

std::vector<double> Stencil5::apply(const ScalarField& u) const {
  std::vector<double> out(c.size());
  for (int j = 1; j <= ny; ++j)
    for (int i = 1; i <= nx; ++i) {
      const std::size_t k = index(i, j);
      out[k] = c[k] * u(i, j) + e[k] * u(i + 1, j) + w[k] * u(i - 1, j) + n[k] * u(i, j + 1) +
               s[k] * u(i, j - 1);
    }
  return out;
}

SparseMatrix Stencil5::matrix() const {
  SparseMatrix m(static_cast<Eigen::Index>(c.size()), static_cast<Eigen::Index>(c.size()));
  m.reserve(Eigen::VectorXi::Constant(static_cast<Eigen::Index>(c.size()), 5));
  for (int j = 1; j <= ny; ++j)
    for (int i = 1; i <= nx; ++i) {
      const auto k = static_cast<Eigen::Index>(index(i, j));
      if (j > 1) m.insert(k, static_cast<Eigen::Index>(index(i, j - 1))) = s[static_cast<std::size_t>(k)];
      if (i > 1) m.insert(k, static_cast<Eigen::Index>(index(i - 1, j))) = w[static_cast<std::size_t>(k)];
      m.insert(k, k) = c[static_cast<std::size_t>(k)];
      if (i < nx) m.insert(k, static_cast<Eigen::Index>(index(i + 1, j))) = e[static_cast<std::size_t>(k)];
      if (j < ny) m.insert(k, static_cast<Eigen::Index>(index(i, j + 1))) = n[static_cast<std::size_t>(k)];
    }
  m.makeCompressed();
  return m;
}

std::vector<double> Stencil5::boundary_coupling(const ScalarField& ring) const {
  std::vector<double> out(c.size(), 0.0);
  for (int j = 1; j <= ny; ++j)
    for (int i = 1; i <= nx; ++i) {
      const std::size_t k = index(i, j);
      double v = 0.0;
      if (i == nx) v += e[k] * ring(i + 1, j);
      if (i == 1) v += w[k] * ring(i - 1, j);
      if (j == ny) v += n[k] * ring(i, j + 1);
      if (j == 1) v += s[k] * ring(i, j - 1);
      out[k] = v;
    }
  return out;
}

std::vector<double> Stencil5::row_sums() const {
  std::vector<double> out(c.size());
  for (std::size_t k = 0; k < c.size(); ++k) out[k] = c[k] + e[k] + w[k] + n[k] + s[k];
  return out;
}

bool Stencil5::is_m_matrix(double tol) const {
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (e[k] > 0.0 || w[k] > 0.0 || n[k] > 0.0 || s[k] > 0.0) return false;
    const double off = -(e[k] + w[k] + n[k] + s[k]);
    if (c[k] < off - tol * std::abs(c[k])) return false;
  }
  return true;
}

bool Stencil5::is_symmetric(double tol) const {
  for (int j = 1; j <= ny; ++j)
    for (int i = 1; i <= nx; ++i) {
      const std::size_t k = index(i, j);
      if (i < nx && std::abs(e[k] - w[index(i + 1, j)]) > tol * std::abs(c[k])) return false;
      if (j < ny && std::abs(n[k] - s[index(i, j + 1)]) > tol * std::abs(c[k])) return false;
    }
  return true;
}

FaceField harmonic_face_conductivity(const Grid& grid, const ScalarField& kappa_nodes) {
  for (double k : kappa_nodes.values())
    if (!(k > 0.0)) throw std::invalid_argument("conductivity must be positive at every node");
  auto hm = [](double a, double b) { return 2.0 * a * b / (a + b); };
  FaceField f(grid);
  for (int j = 1; j <= grid.ny(); ++j)
    for (int i = 0; i <= grid.nx(); ++i) f.x(i, j) = hm(kappa_nodes(i, j), kappa_nodes(i + 1, j));
  for (int j = 0; j <= grid.ny(); ++j)
    for (int i = 1; i <= grid.nx(); ++i) f.y(i, j) = hm(kappa_nodes(i, j), kappa_nodes(i, j + 1));
  return f;
}

FaceField kirchhoff_face_conductivity(const Grid& grid, const ConductivityLaw& law,
                                      const ScalarField& theta) {
  FaceField f(grid);
  for (int j = 1; j <= grid.ny(); ++j)
    for (int i = 0; i <= grid.nx(); ++i) f.x(i, j) = kirchhoff_secant(law, theta(i + 1, j), theta(i, j));
  for (int j = 0; j <= grid.ny(); ++j)
    for (int i = 1; i <= grid.nx(); ++i) f.y(i, j) = kirchhoff_secant(law, theta(i, j + 1), theta(i, j));
  return f;
}

Stencil5 diffusion_operator(const Grid& grid, const FaceField& kappa_faces) {
  Stencil5 st(grid);
  const double ax = 1.0 / (grid.hx() * grid.hx());
  const double ay = 1.0 / (grid.hy() * grid.hy());
  for (int j = 1; j <= grid.ny(); ++j)
    for (int i = 1; i <= grid.nx(); ++i) {
      const std::size_t k = st.index(i, j);
      const double ke = kappa_faces.x(i, j) * ax, kw = kappa_faces.x(i - 1, j) * ax;
      const double kn = kappa_faces.y(i, j) * ay, ks = kappa_faces.y(i, j - 1) * ay;
      if (!(ke > 0.0 && kw > 0.0 && kn > 0.0 && ks > 0.0))
        throw std::invalid_argument("face conductivity must be positive");
      st.e[k] = -ke;
      st.w[k] = -kw;
      st.n[k] = -kn;
      st.s[k] = -ks;
      st.c[k] = ke + kw + kn + ks;
    }
  return st;
}

FaceField stream_face_fluxes(const Grid& grid, const VelocityBasis& basis,
                             std::span<const double> coeffs) {
  if (static_cast<int>(coeffs.size()) != basis.size())
    throw std::invalid_argument("coefficient vector does not match the basis dimension");
  const int nx = grid.nx(), ny = grid.ny();
  // Stream function at the dual corners ((I+1/2) hx, (J+1/2) hy).
  std::vector<double> psi(static_cast<std::size_t>(nx + 1) * (ny + 1), 0.0);
  for (int j = 0; j < basis.size(); ++j) {
    const double cj = coeffs[static_cast<std::size_t>(j)];
    if (cj == 0.0) continue;
    for (int J = 0; J <= ny; ++J)
      for (int I = 0; I <= nx; ++I)
        psi[static_cast<std::size_t>(J) * (nx + 1) + I] += cj * basis.dual_stream(j, I, J);
  }
  auto at = [&](int I, int J) { return psi[static_cast<std::size_t>(J) * (nx + 1) + I]; };
  FaceField f(grid);
  // x-face between nodes i and i+1 lies at x = (i+1/2) hx, y in [(j-1/2) hy, (j+1/2) hy].
  for (int j = 1; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) f.x(i, j) = at(i, j) - at(i, j - 1);
  for (int j = 0; j <= ny; ++j)
    for (int i = 1; i <= nx; ++i) f.y(i, j) = -(at(i, j) - at(i - 1, j));
  return f;
}

FaceField point_face_fluxes(const Grid& grid, const VelocityBasis& basis,
                            std::span<const double> coeffs) {
  FaceField f(grid);
  for (int j = 1; j <= grid.ny(); ++j)
    for (int i = 0; i <= grid.nx(); ++i)
      f.x(i, j) = eval_field(basis, coeffs, (i + 0.5) * grid.hx(), grid.y(j)).u * grid.hy();
  for (int j = 0; j <= grid.ny(); ++j)
    for (int i = 1; i <= grid.nx(); ++i)
      f.y(i, j) = eval_field(basis, coeffs, grid.x(i), (j + 0.5) * grid.hy()).v * grid.hx();
  return f;
}

Stencil5 convection_operator(const Grid& grid, const FaceField& fluxes) {
  Stencil5 st(grid);
  const double inv = 1.0 / grid.cv_area();
  for (int j = 1; j <= grid.ny(); ++j)
    for (int i = 1; i <= grid.nx(); ++i) {
      const std::size_t k = st.index(i, j);
      // Outward fluxes of the control volume around (i, j).
      const double fe = fluxes.x(i, j), fw = -fluxes.x(i - 1, j);
      const double fn = fluxes.y(i, j), fs = -fluxes.y(i, j - 1);
      st.c[k] = inv * (std::max(fe, 0.0) + std::max(fw, 0.0) + std::max(fn, 0.0) + std::max(fs, 0.0));
      st.e[k] = inv * std::min(fe, 0.0);
      st.w[k] = inv * std::min(fw, 0.0);
      st.n[k] = inv * std::min(fn, 0.0);
      st.s[k] = inv * std::min(fs, 0.0);
    }
  return st;
}

std::vector<double> divergence_defect(const Grid& grid, const FaceField& fluxes) {
  std::vector<double> out(grid.interior_count());
  for (int j = 1; j <= grid.ny(); ++j)
    for (int i = 1; i <= grid.nx(); ++i)
      out[grid.unknown(i, j)] =
          (fluxes.x(i, j) - fluxes.x(i - 1, j) + fluxes.y(i, j) - fluxes.y(i, j - 1)) / grid.cv_area();
  return out;
}

Vec2 nodal_gradient(const Grid& grid, const ScalarField& u, int i, int j) {
  const int last_x = grid.nx() + 1, last_y = grid.ny() + 1;
  double gx, gy;
  if (i == 0)
    gx = (u(1, j) - u(0, j)) / grid.hx();
  else if (i == last_x)
    gx = (u(last_x, j) - u(last_x - 1, j)) / grid.hx();
  else
    gx = (u(i + 1, j) - u(i - 1, j)) / (2.0 * grid.hx());
  if (j == 0)
    gy = (u(i, 1) - u(i, 0)) / grid.hy();
  else if (j == last_y)
    gy = (u(i, last_y) - u(i, last_y - 1)) / grid.hy();
  else
    gy = (u(i, j + 1) - u(i, j - 1)) / (2.0 * grid.hy());
  return {gx, gy};
}

}  // namespace nsf
