#pragma once

#include <span>
#include <vector>

#include "nsf/grid.hpp"
#include "nsf/sym_tensor.hpp"

namespace nsf {

/// Velocity, its full gradient and the stream function of one field at one point.
struct ModeSample {
  double u = 0.0, v = 0.0;      // velocity components
  double ux = 0.0, uy = 0.0;    // du/dx, du/dy
  double vx = 0.0, vy = 0.0;    // dv/dx, dv/dy
  double psi = 0.0;             // stream function, (u, v) = (psi_y, -psi_x)

  SymTensor sym_gradient() const { return {ux, 0.5 * (uy + vx), vy}; }
  double divergence() const { return ux + vy; }
  ModeSample& axpy(double a, const ModeSample& o);
};

/// Wavenumbers of the stream function sin^2(m pi x / Lx) sin^2(n pi y / Ly).
struct ModeIndex {
  int m = 1;
  int n = 1;
};

/// First `count` (m, n) pairs ordered by total degree m + n, then by m.
std::vector<ModeIndex> total_degree_modes(int count);

/// Discretely L2-orthonormal, pointwise divergence-free velocity modes.
///
/// Raw modes are curls of sin^2 stream functions, so each vanishes on the boundary
/// together with its stream function gradient. They are orthonormalized by modified
/// Gram-Schmidt (applied twice) in the quadrature inner product of the grid. Mode
/// values and gradients are cached at every quadrature point; the stream functions
/// are cached at the dual-cell corners used for exact face fluxes.
class VelocityBasis {
 public:
  VelocityBasis(const Grid& grid, int n_modes);

  int size() const { return static_cast<int>(modes_.size()); }
  const std::vector<ModeIndex>& raw_modes() const { return modes_; }

  /// Orthonormal mode j evaluated anywhere in the domain.
  ModeSample eval_mode(int j, double x, double y) const;

  /// Cached sample of mode j at quadrature point q.
  const ModeSample& at_quad(std::size_t q, int j) const {
    return quad_[q * modes_.size() + static_cast<std::size_t>(j)];
  }
  /// Stream function of mode j at the dual corner ((I+1/2) hx, (J+1/2) hy), I in [0, nx].
  double dual_stream(int j, int I, int J) const {
    return dual_psi_[static_cast<std::size_t>(j) * dual_stride_ +
                     static_cast<std::size_t>(J) * (nx_ + 1) + I];
  }

  /// Max |G - I| of the discrete Gram matrix.
  double orthonormality_defect() const { return gram_defect_; }
  std::vector<double> gram_matrix() const;

 private:
  ModeSample raw(std::size_t k, double x, double y) const;

  int nx_ = 0, ny_ = 0;
  double lx_ = 1.0, ly_ = 1.0;
  std::vector<ModeIndex> modes_;
  std::vector<double> coeff_;  // row-major n x n, lower triangular
  std::vector<ModeSample> quad_;
  std::vector<double> quad_w_;
  std::vector<double> dual_psi_;
  std::size_t dual_stride_ = 0;
  double gram_defect_ = 0.0;
};

/// Galerkin coefficients c_i(t) of v = sum_i c_i w_i.
struct VelocityState {
  double t = 0.0;
  std::vector<double> coeffs;

  double kinetic_energy() const;  // (1/2) |c|^2, the discrete (1/2)||v||^2
  double l2_norm() const;
};

ModeSample eval_field(const VelocityBasis& basis, std::span<const double> coeffs, double x,
                      double y);
std::vector<Vec2> eval_velocity(const VelocityBasis& basis, const VelocityState& state,
                                std::span<const Vec2> points);
std::vector<SymTensor> eval_sym_gradient(const VelocityBasis& basis, const VelocityState& state,
                                         std::span<const Vec2> points);

}  // namespace nsf
