#pragma once

#include <span>
#include <vector>

#include <Eigen/SparseCore>

#include "nsf/basis.hpp"
#include "nsf/constitutive.hpp"
#include "nsf/grid.hpp"

namespace nsf {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// One value per control-volume face.
///
/// x-faces separate nodes (i, j) and (i+1, j), i in [0, nx], j in [1, ny];
/// y-faces separate nodes (i, j) and (i, j+1), i in [1, nx], j in [0, ny].
/// For fluxes the sign convention is positive along +x (resp. +y).
class FaceField {
 public:
  FaceField() = default;
  explicit FaceField(const Grid& grid, double value = 0.0)
      : nx_(grid.nx()), ny_(grid.ny()),
        xf_(static_cast<std::size_t>(nx_ + 1) * ny_, value),
        yf_(static_cast<std::size_t>(nx_) * (ny_ + 1), value) {}

  double& x(int i, int j) { return xf_[static_cast<std::size_t>(j - 1) * (nx_ + 1) + i]; }
  double x(int i, int j) const { return xf_[static_cast<std::size_t>(j - 1) * (nx_ + 1) + i]; }
  double& y(int i, int j) { return yf_[static_cast<std::size_t>(j) * nx_ + (i - 1)]; }
  double y(int i, int j) const { return yf_[static_cast<std::size_t>(j) * nx_ + (i - 1)]; }

  double max_abs() const;

 private:
  int nx_ = 0, ny_ = 0;
  std::vector<double> xf_, yf_;
};

/// Five-point operator on interior nodes, rows already divided by the control volume.
///
/// (L u)_P = c_P u_P + c_E u_E + c_W u_W + c_N u_N + c_S u_S, where neighbours may
/// be boundary-ring nodes; those couplings move to the right-hand side in solves.
struct Stencil5 {
  int nx = 0, ny = 0;
  std::vector<double> c, e, w, n, s;

  explicit Stencil5(const Grid& grid);
  Stencil5() = default;

  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j - 1) * nx + (i - 1);
  }
  Stencil5& operator+=(const Stencil5& o);
  /// Adds `value` to every diagonal entry.
  void shift(double value);

  /// Applies to a full field (ring included); result indexed like Grid::unknown.
  std::vector<double> apply(const ScalarField& u) const;
  /// Interior-only sparse matrix.
  SparseMatrix matrix() const;
  /// Contribution of the ring values, to be subtracted from the right-hand side.
  std::vector<double> boundary_coupling(const ScalarField& ring) const;

  std::vector<double> row_sums() const;
  /// Off-diagonals <= 0 and c_P >= sum |off| - tol |c_P| in every row.
  bool is_m_matrix(double tol = 1e-12) const;
  bool is_symmetric(double tol = 1e-12) const;
};

/// Face conductivity from nodal conductivities by harmonic averaging.
FaceField harmonic_face_conductivity(const Grid& grid, const ScalarField& kappa_nodes);

/// Face conductivity (K(a) - K(b)) / (a - b): the mean of kappa between the two nodal
/// temperatures. With it, the flux across a face equals the Kirchhoff difference.
FaceField kirchhoff_face_conductivity(const Grid& grid, const ConductivityLaw& law,
                                      const ScalarField& theta);

/// Divergence-form diffusion -div(kappa grad u) with given face conductivities.
Stencil5 diffusion_operator(const Grid& grid, const FaceField& kappa_faces);

/// Volume fluxes through the faces of the dual control volumes.
///
/// `stream_face_fluxes` integrates the normal velocity exactly via stream function
/// differences, so every control volume has zero net flux up to rounding.
/// `point_face_fluxes` uses the face-midpoint velocity times the face length.
FaceField stream_face_fluxes(const Grid& grid, const VelocityBasis& basis,
                             std::span<const double> coeffs);
FaceField point_face_fluxes(const Grid& grid, const VelocityBasis& basis,
                            std::span<const double> coeffs);

/// First-order upwind div(u v) from face fluxes; row sums equal the discrete divergence.
Stencil5 convection_operator(const Grid& grid, const FaceField& fluxes);

/// Net outward flux per control volume divided by its area.
std::vector<double> divergence_defect(const Grid& grid, const FaceField& fluxes);

/// Central-difference gradient at an interior node, one-sided on the ring.
Vec2 nodal_gradient(const Grid& grid, const ScalarField& u, int i, int j);

}  // namespace nsf
