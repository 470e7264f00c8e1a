#include "nsf/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace nsf {

GaussRule gauss_legendre(int q) {
  if (q < 1 || q > 12) throw std::invalid_argument("quadrature order must be in [1, 12]");
  // Newton iteration on the Legendre polynomial, then map [-1, 1] -> [0, 1].
  GaussRule rule;
  rule.nodes.resize(static_cast<std::size_t>(q));
  rule.weights.resize(static_cast<std::size_t>(q));
  for (int i = 0; i < q; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (q + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int n = 1; n <= q; ++n) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * n - 1.0) * z * p1 - (n - 1.0) * p2) / n;
      }
      dp = q * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    rule.nodes[static_cast<std::size_t>(q - 1 - i)] = 0.5 * (z + 1.0);
    rule.weights[static_cast<std::size_t>(q - 1 - i)] = 1.0 / ((1.0 - z * z) * dp * dp);
  }
  return rule;
}

Grid::Grid(int nx, int ny, double lx, double ly, int quad_order)
    : nx_(nx), ny_(ny), lx_(lx), ly_(ly), quad_order_(quad_order) {
  if (nx < 2 || ny < 2) throw std::invalid_argument("grid needs at least 2x2 interior nodes");
  if (!(lx > 0.0) || !(ly > 0.0)) throw std::invalid_argument("domain lengths must be positive");
  hx_ = lx / (nx + 1);
  hy_ = ly / (ny + 1);
  const GaussRule g = gauss_legendre(quad_order);
  quad_.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1) * quad_order * quad_order);
  for (int cj = 0; cj <= ny; ++cj)
    for (int ci = 0; ci <= nx; ++ci)
      for (int b = 0; b < quad_order; ++b)
        for (int a = 0; a < quad_order; ++a) {
          QuadPoint p;
          p.ci = ci;
          p.cj = cj;
          p.sx = g.nodes[static_cast<std::size_t>(a)];
          p.sy = g.nodes[static_cast<std::size_t>(b)];
          p.x = (ci + p.sx) * hx_;
          p.y = (cj + p.sy) * hy_;
          p.w = g.weights[static_cast<std::size_t>(a)] * g.weights[static_cast<std::size_t>(b)] *
                hx_ * hy_;
          quad_.push_back(p);
        }
}

double Grid::nodal_weight(int i, int j) const {
  const double wx = (i == 0 || i == nx_ + 1) ? 0.5 : 1.0;
  const double wy = (j == 0 || j == ny_ + 1) ? 0.5 : 1.0;
  return wx * wy * hx_ * hy_;
}

double ScalarField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double ScalarField::max() const { return *std::max_element(values_.begin(), values_.end()); }

bool ScalarField::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double ScalarField::boundary_min() const {
  double m = std::numeric_limits<double>::infinity();
  for (int j = 0; j < py_; ++j)
    for (int i = 0; i < px_; ++i)
      if (i == 0 || j == 0 || i == px_ - 1 || j == py_ - 1) m = std::min(m, (*this)(i, j));
  return m;
}

double ScalarField::boundary_max() const {
  double m = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < py_; ++j)
    for (int i = 0; i < px_; ++i)
      if (i == 0 || j == 0 || i == px_ - 1 || j == py_ - 1) m = std::max(m, (*this)(i, j));
  return m;
}

std::vector<double> ScalarField::interior(const Grid& grid) const {
  std::vector<double> out(grid.interior_count());
  for (int j = 1; j <= grid.ny(); ++j)
    for (int i = 1; i <= grid.nx(); ++i) out[grid.unknown(i, j)] = (*this)(i, j);
  return out;
}

void ScalarField::set_interior(const Grid& grid, std::span<const double> values) {
  if (values.size() != grid.interior_count())
    throw std::invalid_argument("interior vector has the wrong size");
  for (int j = 1; j <= grid.ny(); ++j)
    for (int i = 1; i <= grid.nx(); ++i) (*this)(i, j) = values[grid.unknown(i, j)];
}

double integrate_nodal(const Grid& grid, const ScalarField& f) {
  double s = 0.0;
  for (int j = 0; j < grid.py(); ++j)
    for (int i = 0; i < grid.px(); ++i) s += grid.nodal_weight(i, j) * f(i, j);
  return s;
}

Vec2 interpolate_gradient(const Grid& grid, const ScalarField& f, const QuadPoint& q) {
  const double a = f(q.ci, q.cj), b = f(q.ci + 1, q.cj);
  const double c = f(q.ci, q.cj + 1), d = f(q.ci + 1, q.cj + 1);
  return {((1 - q.sy) * (b - a) + q.sy * (d - c)) / grid.hx(),
          ((1 - q.sx) * (c - a) + q.sx * (d - b)) / grid.hy()};
}

}  // namespace nsf
