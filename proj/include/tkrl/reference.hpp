/// Reference Kahler structure of a catalog entry: grids, the Guillemin
/// symplectic potential and its conjugate, and the Ricci potential f_omega.
#pragma once

#include <memory>

#include "tkrl/grid.hpp"
#include "tkrl/legendre.hpp"
#include "tkrl/polytope.hpp"

namespace tkrl {

/// Grid resolutions.  Defaults target the desk-scale budget: 1D runs in
/// seconds, 2D in minutes.
struct Discretization {
  double delta = 1e-7;      // interior margin of the moment grid
  int moment_divisions = 0; // lattice steps across the widest polytope extent
  double dual_R = 14.0;     // dual box half-width
  int dual_nodes = 0;       // dual nodes per axis

  static Discretization defaults(int dim) {
    Discretization d;
    d.moment_divisions = dim == 1 ? 1024 : 120;
    d.dual_nodes = dim == 1 ? 4097 : 769;
    return d;
  }
};

/// Immutable per-manifold reference data.
///
/// The reference potential phi_ref is the conjugate of the Guillemin
/// potential g_P.  It is carried in two forms:
///  * `at(y)` solves grad g_P(x) = y by damped Newton and returns machine
///    precision values of phi_ref, its log det Hessian (exactly
///    -log det D^2 g_P at the solution) and f_omega -- used for all
///    continuum quantities;
///  * `phi_ref_grid` is the discrete refined transform of g_P sampled on the
///    dual grid -- used when relative potentials u are manipulated as dual
///    grid functions, so that transform tail artifacts cancel in differences.
class ReferenceGeometry {
 public:
  ReferenceGeometry(const DelzantPolytope& poly, const Discretization& disc);

  const DelzantPolytope& poly() const { return *poly_; }
  const MomentGrid& mgrid() const { return mgrid_; }
  const DualGrid& dgrid() const { return dgrid_; }
  int dim() const { return poly_->dim; }
  double VolX() const { return VolX_; }
  double c0() const { return c0_; }

  /// Cell-overlap quadrature weights on the moment grid (sum = vol(P)).
  const GridFn& quad_w() const { return quad_w_; }
  /// Weighted polytope mean (1/vol(P)) * sum_k w_k f_k.
  double weighted_mean(const GridFn& f) const;

  const GridFn& g_vals() const { return g_vals_; }
  const Vec& g_grad(size_t k) const { return g_grad_[k]; }
  const Sym& g_hess(size_t k) const { return g_hess_[k]; }
  double g_logdet(size_t k) const { return g_logdet_[k]; }

  /// f_omega evaluated at the reference pullback point grad g_P(x_k); these
  /// are closed-form (no transforms involved).
  double f_omega_ref_node(size_t k) const { return ref_f_omega_[k]; }

  const GridFn& phi_ref_grid() const { return phi_ref_grid_; }

  struct RefPoint {
    double phi;      // phi_ref(y)
    Vec x;           // grad phi_ref(y) = the Newton solution
    double logdet;   // log det D^2 phi_ref(y)
    double f_omega;  // -logdet - phi + c0
  };

  /// Newton evaluation; warm_x (if given) must be interior to P.
  RefPoint at(const Vec& y, const Vec* warm_x = nullptr) const;

  // Dual-node caches (Newton at every dual grid node).
  const GridFn& phi_ref_dual() const;
  const std::vector<Sym>& hess_ref_dual() const;  // D^2 phi_ref
  const GridFn& f_omega_dual() const;

  /// Ricci form of the reference metric in dual coordinates:
  /// R(y) = -D^2_y log det D^2 phi_ref(y) = D^2_y (phi_ref + f_omega).
  /// Finite differences of the Newton-exact log det field; bilinear
  /// interpolation off the lattice.
  const std::vector<Sym>& ricci_dual() const;
  Sym ricci_at(const Vec& y) const;

  /// Calibrated floor for dual-side discrete convexity checks: transform-
  /// derived grid functions carry second-difference noise at the level of
  /// the reference's own transform error band, measured here once.
  double cvx_noise_floor() const { return cvx_noise_floor_; }

  /// Largest min_l(grad phi_ref(y)) over the dual box boundary: measures how
  /// completely the box saturates the gradient image (should be ~e^{-2R}).
  double boundary_saturation() const;

 private:
  const DelzantPolytope* poly_;
  MomentGrid mgrid_;
  DualGrid dgrid_;
  double VolX_ = 0, c0_ = 0, volP_ = 0, cvx_noise_floor_ = 0;
  GridFn quad_w_;
  GridFn g_vals_, g_logdet_, ref_f_omega_;
  std::vector<Vec> g_grad_;
  std::vector<Sym> g_hess_;
  GridFn phi_ref_grid_;
  std::unique_ptr<ConjugateEvaluator> conj_;
  GridFn phi_ref_dual_, f_omega_dual_;
  std::vector<Sym> hess_ref_dual_, ricci_dual_;
};

}  // namespace tkrl
