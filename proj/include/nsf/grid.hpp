#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace nsf {

/// Gauss-Legendre rule on [0, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// q-point Gauss-Legendre rule on [0, 1], exact for polynomials of degree 2q-1.
GaussRule gauss_legendre(int q);

/// One tensor Gauss point inside a grid cell.
struct QuadPoint {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;  // physical weight
  int ci = 0;      // cell index: the cell spans nodes ci..ci+1 in x
  int cj = 0;
  double sx = 0.0;  // local coordinate in the cell, [0, 1]
  double sy = 0.0;
};

/// Structured node grid on [0, Lx] x [0, Ly].
///
/// Nodes are x_i = i hx for i = 0..nx+1 (likewise in y); indices 0 and nx+1 form
/// the Dirichlet ring. Interior nodes own the dual control volume of area hx*hy.
/// Cells [x_i, x_{i+1}] x [y_j, y_{j+1}] carry the tensor Gauss rule of order q.
class Grid {
 public:
  Grid(int nx, int ny, double lx = 1.0, double ly = 1.0, int quad_order = 3);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double lx() const { return lx_; }
  double ly() const { return ly_; }
  double hx() const { return hx_; }
  double hy() const { return hy_; }
  int quad_order() const { return quad_order_; }

  /// Nodes per row / column including the boundary ring.
  int px() const { return nx_ + 2; }
  int py() const { return ny_ + 2; }
  std::size_t node_count() const { return static_cast<std::size_t>(px()) * py(); }
  std::size_t interior_count() const { return static_cast<std::size_t>(nx_) * ny_; }

  std::size_t node(int i, int j) const { return static_cast<std::size_t>(j) * px() + i; }
  /// Index of an interior node in the unknown vector, row-major over interior nodes.
  std::size_t unknown(int i, int j) const {
    return static_cast<std::size_t>(j - 1) * nx_ + (i - 1);
  }
  bool is_boundary(int i, int j) const { return i == 0 || j == 0 || i == nx_ + 1 || j == ny_ + 1; }

  double x(int i) const { return i * hx_; }
  double y(int j) const { return j * hy_; }
  double cv_area() const { return hx_ * hy_; }
  double area() const { return lx_ * ly_; }

  /// Trapezoid weight of node (i, j); the weights sum to the domain area.
  double nodal_weight(int i, int j) const;

  const std::vector<QuadPoint>& quad_points() const { return quad_; }
  /// Quadrature points per cell (q*q); the points of cell (ci, cj) are contiguous.
  int points_per_cell() const { return quad_order_ * quad_order_; }
  std::size_t cell_offset(int ci, int cj) const {
    return (static_cast<std::size_t>(cj) * (nx_ + 1) + ci) * points_per_cell();
  }

 private:
  int nx_, ny_;
  double lx_, ly_, hx_, hy_;
  int quad_order_;
  std::vector<QuadPoint> quad_;
};

/// Node-indexed scalar on the full grid (interior plus Dirichlet ring), row-major.
class ScalarField {
 public:
  ScalarField() = default;
  ScalarField(const Grid& grid, double value = 0.0)
      : px_(grid.px()), py_(grid.py()), values_(grid.node_count(), value) {}

  int px() const { return px_; }
  int py() const { return py_; }
  double& operator()(int i, int j) { return values_[static_cast<std::size_t>(j) * px_ + i]; }
  double operator()(int i, int j) const { return values_[static_cast<std::size_t>(j) * px_ + i]; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  double min() const;
  double max() const;
  bool all_finite() const;
  bool same_shape(const ScalarField& o) const { return px_ == o.px_ && py_ == o.py_; }

  /// Minimum / maximum over the boundary ring only.
  double boundary_min() const;
  double boundary_max() const;

  /// Copies the interior values into a vector indexed like Grid::unknown.
  std::vector<double> interior(const Grid& grid) const;
  void set_interior(const Grid& grid, std::span<const double> values);

 private:
  int px_ = 0;
  int py_ = 0;
  std::vector<double> values_;
};

/// Trapezoid integral over the domain of the nodal field.
double integrate_nodal(const Grid& grid, const ScalarField& f);

/// Bilinear interpolation of a nodal field at a quadrature point of its cell.
inline double interpolate(const ScalarField& f, const QuadPoint& q) {
  const double a = f(q.ci, q.cj), b = f(q.ci + 1, q.cj);
  const double c = f(q.ci, q.cj + 1), d = f(q.ci + 1, q.cj + 1);
  return (1 - q.sx) * (1 - q.sy) * a + q.sx * (1 - q.sy) * b + (1 - q.sx) * q.sy * c +
         q.sx * q.sy * d;
}

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

/// Gradient of the bilinear interpolant at a quadrature point.
Vec2 interpolate_gradient(const Grid& grid, const ScalarField& f, const QuadPoint& q);

}  // namespace nsf
