/// Torus-invariant relative Kahler potentials.
///
/// The canonical state is v = s - g_P on the moment grid (the bounded
/// symplectic-side correction); the dual-side relative potential
/// u = phi - phi_ref and the moment-map pullback data are derived lazily.
/// Keeping the singular Guillemin part analytic means every finite
/// difference acts only on the smooth correction.
#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "tkrl/legendre.hpp"
#include "tkrl/reference.hpp"

namespace tkrl {

/// Discrete convexity tolerance: second differences along lattice lines may
/// dip below zero by at most eps_cvx(f) before the data counts as non-convex.
double eps_cvx(const GridFn& f);

/// Legendre transform with a convexity precondition (throws ConvexityError).
GridFn legendre_to_dual(const ReferenceGeometry& ref, const GridFn& s_moment);
GridFn legendre_to_moment(const ReferenceGeometry& ref, const GridFn& phi_dual);

/// Discrete convex envelope on the dual box (exact lower hull in 1D; the
/// separable double-transform approximation from below in 2D).  Idempotent,
/// pointwise <= f.
GridFn convexity_project(const DualGrid& g, const GridFn& f);

class PotentialField {
 public:
  /// s = g_P + v given directly on the moment grid.
  static PotentialField from_symplectic(const ReferenceGeometry& ref,
                                        const GridFn& s);
  /// Relative potential u on the dual grid; phi = phi_ref + u must be
  /// discretely convex.
  static PotentialField from_dual(const ReferenceGeometry& ref,
                                  const GridFn& u);
  /// Correction v = s - g_P on the moment grid (the native state).
  static PotentialField from_v(const ReferenceGeometry& ref, GridFn v);

  static PotentialField zero(const ReferenceGeometry& ref);

  const ReferenceGeometry& ref() const { return *ref_; }
  int dim() const { return ref_->dim(); }

  const GridFn& v() const { return v_; }
  GridFn symplectic() const;  // g_P + v

  /// u = (g_P + v)* - phi_ref on the dual grid (cached).  Both terms are the
  /// same discrete transform, so truncation artifacts cancel in the
  /// difference and u is flat at the box boundary for bounded corrections.
  const GridFn& u() const;

  double sup() const;
  double inf() const;
  double osc() const { return sup() - inf(); }

  /// Moment-map pullback data at the quadrature nodes x_k.
  struct Pullback {
    std::vector<Vec> y;    // y_u(x_k) = grad s(x_k)
    GridFn det_s;          // det D^2 s(x_k) (analytic g part + FD on v)
    GridFn u_at_y;         // u(y_k), from the exact Young identity
    GridFn phi_ref_at_y;   // phi_ref(y_k), Newton precision
    GridFn logdet_ref;     // log det D^2 phi_ref(y_k)
    GridFn f_omega_at_y;   // f_omega(y_k)
    std::vector<Sym> hess_s;       // D^2 s(x_k)
    std::vector<Sym> hess_ref_y;   // D^2 phi_ref(y_k) = (D^2 g_P)^{-1}
  };
  const Pullback& pullback() const;

  /// Pushforward quadrature: int_X G omega_u^n for G given at the pullback
  /// nodes.  Normalized so that G == 1 integrates to Vol(X) exactly.
  double integrate(const GridFn& G_at_nodes) const;

  /// omega_u^n / omega^n evaluated at the pullback points y_u(x_k).
  GridFn ma_density_ratio() const;

  /// Pointwise phi(y) = sup_x (<x,y> - s(x)) (not grid-interpolated).
  double phi_at(const Vec& y, Vec* argmax = nullptr) const;

  void save(const std::string& path) const;
  static PotentialField load(const std::string& path,
                             const ReferenceGeometry& ref);

 private:
  PotentialField(const ReferenceGeometry& ref, GridFn v);

  const ReferenceGeometry* ref_;
  GridFn v_;
  mutable std::optional<GridFn> u_;
  mutable std::optional<Pullback> pb_;
  mutable std::shared_ptr<ConjugateEvaluator> conj_;
  mutable GridFn s_for_conj_;
};

}  // namespace tkrl
