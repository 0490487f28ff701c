#include "tkrl/reference.hpp"

#include <algorithm>
#include <cmath>

namespace tkrl {

ReferenceGeometry::ReferenceGeometry(const DelzantPolytope& poly,
                                     const Discretization& disc)
    : poly_(&poly) {
  if (disc.moment_divisions < 8) throw ParameterError("discretization too coarse");
  // widest extent across coordinates
  long lo0 = poly.vertices[0][0], hi0 = lo0, lo1 = 0, hi1 = 0;
  if (poly.dim == 2) { lo1 = poly.vertices[0][1]; hi1 = lo1; }
  for (const auto& v : poly.vertices) {
    lo0 = std::min(lo0, v[0]); hi0 = std::max(hi0, v[0]);
    if (poly.dim == 2) { lo1 = std::min(lo1, v[1]); hi1 = std::max(hi1, v[1]); }
  }
  double extent = double(std::max(hi0 - lo0, hi1 - lo1));
  double h = extent / disc.moment_divisions;

  mgrid_ = make_moment_grid(poly, h, disc.delta);
  dgrid_ = make_dual_grid(poly.dim, disc.dual_R, disc.dual_nodes);
  VolX_ = poly.manifold_volume();
  volP_ = poly.volume();
  quad_w_ = quadrature_weights(mgrid_);

  size_t n = mgrid_.size();
  g_vals_.resize(n);
  g_logdet_.resize(n);
  g_grad_.resize(n);
  g_hess_.resize(n);
  for (size_t k = 0; k < n; ++k) {
    Vec x = mgrid_.node(k);
    g_vals_[k] = poly.guillemin(x);
    g_grad_[k] = poly.guillemin_grad(x);
    g_hess_[k] = poly.guillemin_hess(x);
    double d = g_hess_[k].det(poly.dim);
    if (d <= 0) throw DegeneracyError("reference Hessian degenerate");
    g_logdet_[k] = std::log(d);
  }

  phi_ref_grid_ = dual_from_moment(mgrid_, g_vals_, dgrid_, true);
  conj_ = std::make_unique<ConjugateEvaluator>(mgrid_, g_vals_);

  // Newton solve at every dual node (marching warm starts)
  size_t nd = dgrid_.size();
  phi_ref_dual_.resize(nd);
  hess_ref_dual_.resize(nd);
  Vec row_warm = poly.barycenter();
  Vec warm = row_warm;
  for (size_t k = 0; k < nd; ++k) {
    bool row_start = dgrid_.dim == 2 && k % size_t(dgrid_.n) == 0;
    if (row_start) warm = row_warm;
    RefPoint p = at(dgrid_.node(k), k == 0 ? nullptr : &warm);
    if (row_start || k == 0) row_warm = p.x;
    warm = p.x;
    phi_ref_dual_[k] = p.phi;
    hess_ref_dual_[k] = poly.guillemin_hess(p.x).inverse(poly.dim);
  }

  // calibrate the dual-side convexity noise floor: the worst negative
  // second difference (axes and diagonals) of the transform error field
  {
    GridFn diff(nd);
    for (size_t k = 0; k < nd; ++k) diff[k] = phi_ref_grid_[k] - phi_ref_dual_[k];
    double worst = 0;
    int nn = dgrid_.n;
    auto d2 = [&](size_t a, size_t b, size_t c) {
      double v = diff[a] - 2 * diff[b] + diff[c];
      worst = std::min(worst, v);
    };
    if (dgrid_.dim == 1) {
      for (int i = 1; i + 1 < nn; ++i) d2(i - 1, i, i + 1);
    } else {
      const int dirs[4][2] = {{1, 0}, {0, 1}, {1, 1}, {-1, 1}};
      for (int j = 1; j + 1 < nn; ++j)
        for (int i = 1; i + 1 < nn; ++i)
          for (const auto& d : dirs)
            d2(dgrid_.index(i - d[0], j - d[1]), dgrid_.index(i, j),
               dgrid_.index(i + d[0], j + d[1]));
    }
    cvx_noise_floor_ = 4.0 * (-worst);
  }

  // c0 from the probability normalization of e^{f_omega} omega^n:
  //   int e^{f_omega} omega^n = e^{c0} int e^{-phi_ref(y)} dy = 1.
  // The dual-side quadrature captures the boundary-concentrated mass that a
  // moment-side sum would miss (inverse-square-root boundary density).
  double wd = dgrid_.dim == 1 ? dgrid_.h : dgrid_.h * dgrid_.h;
  double mass = 0;
  for (size_t k = 0; k < nd; ++k) mass += std::exp(-phi_ref_dual_[k]);
  c0_ = -std::log(mass * wd);

  f_omega_dual_.resize(nd);
  for (size_t k = 0; k < nd; ++k)
    f_omega_dual_[k] =
        -std::log(hess_ref_dual_[k].det(poly.dim)) - phi_ref_dual_[k] + c0_;

  // Ricci matrix R(y) = -D^2_y log det D^2 phi_ref on the dual lattice.
  // The log det field is Newton-exact at every node, so centered second
  // differences are clean O(h^2); stencils are clamped at the box edges,
  // where the field is asymptotically affine and R ~ 0 anyway.
  {
    GridFn ld(nd);
    for (size_t k = 0; k < nd; ++k)
      ld[k] = std::log(hess_ref_dual_[k].det(poly.dim));
    ricci_dual_.resize(nd);
    int nn = dgrid_.n;
    double ih2 = 1.0 / (dgrid_.h * dgrid_.h);
    auto cl = [&](int i) { return std::clamp(i, 1, nn - 2); };
    if (poly.dim == 1) {
      for (int i = 0; i < nn; ++i) {
        int c = cl(i);
        Sym r{};
        r.xx = -(ld[c - 1] - 2 * ld[c] + ld[c + 1]) * ih2;
        ricci_dual_[i] = r;
      }
    } else {
      for (int j = 0; j < nn; ++j)
        for (int i = 0; i < nn; ++i) {
          int a = cl(i), b = cl(j);
          auto at = [&](int p, int q) { return ld[dgrid_.index(p, q)]; };
          Sym r;
          r.xx = -(at(a - 1, j) - 2 * at(a, j) + at(a + 1, j)) * ih2;
          r.yy = -(at(i, b - 1) - 2 * at(i, b) + at(i, b + 1)) * ih2;
          r.xy = -(at(a + 1, b + 1) - at(a + 1, b - 1) - at(a - 1, b + 1) +
                   at(a - 1, b - 1)) *
                 0.25 * ih2;
          ricci_dual_[dgrid_.index(i, j)] = r;
        }
    }
  }

  // f_omega at the reference pullback points grad g_P(x_k) is closed form:
  //   f_omega(y0(x)) = log det D^2 g - <x, grad g> + g + c0
  ref_f_omega_.resize(n);
  for (size_t k = 0; k < n; ++k) {
    Vec x = mgrid_.node(k);
    ref_f_omega_[k] =
        g_logdet_[k] - dot(x, g_grad_[k], poly.dim) + g_vals_[k] + c0_;
  }
}

ReferenceGeometry::RefPoint ReferenceGeometry::at(const Vec& y,
                                                  const Vec* warm_x) const {
  int dim = poly_->dim;
  Vec x;
  if (warm_x && poly_->min_l(*warm_x) > 0) {
    x = *warm_x;
  } else {
    conj_->eval(y, &x);
    if (poly_->min_l(x) <= 0) {
      // refinement overshoot near a vertex: fall back to the barycenter
      x = poly_->barycenter();
    }
  }
  double tol = 1e-12 * (1.0 + norm(y, dim));
  bool ok = false;
  for (int it = 0; it < 80; ++it) {
    Vec r = sub(y, poly_->guillemin_grad(x));
    if (norm(r, dim) <= tol) { ok = true; break; }
    Sym H = poly_->guillemin_hess(x);
    Vec d = H.solve(r, dim);
    // damp to stay strictly inside P
    double step = 1.0;
    Vec xn = add(x, d);
    int halvings = 0;
    while (poly_->min_l(xn) <= 0 && halvings < 70) {
      step *= 0.5;
      xn = add(x, scale(d, step));
      ++halvings;
    }
    if (halvings >= 70) throw DegeneracyError("reference Newton: step collapsed");
    x = xn;
  }
  if (!ok) {
    // deep in the tails the attainable residual is limited by cancellation in
    // l_i = <a_i,x> + 1; widen the acceptance accordingly
    Vec r = sub(y, poly_->guillemin_grad(x));
    double limit = 1e-8 * (1.0 + norm(y, dim)) +
                   1e-15 / std::max(poly_->min_l(x), 1e-15);
    if (norm(r, dim) > limit)
      throw DegeneracyError("reference Newton did not converge");
  }
  RefPoint p;
  p.x = x;
  p.phi = dot(x, y, dim) - poly_->guillemin(x);
  p.logdet = -poly_->guillemin_logdet_hess(x);
  p.f_omega = -p.logdet - p.phi + c0_;
  return p;
}

double ReferenceGeometry::weighted_mean(const GridFn& f) const {
  if (f.size() != quad_w_.size())
    throw ParameterError("weighted_mean: size mismatch");
  double s = 0;
  for (size_t k = 0; k < f.size(); ++k) s += quad_w_[k] * f[k];
  return s / volP_;
}

const GridFn& ReferenceGeometry::phi_ref_dual() const { return phi_ref_dual_; }

const std::vector<Sym>& ReferenceGeometry::hess_ref_dual() const {
  return hess_ref_dual_;
}

const GridFn& ReferenceGeometry::f_omega_dual() const { return f_omega_dual_; }

const std::vector<Sym>& ReferenceGeometry::ricci_dual() const {
  return ricci_dual_;
}

Sym ReferenceGeometry::ricci_at(const Vec& y) const {
  const DualGrid& g = dgrid_;
  auto comp = [&](double Sym::*m) {
    if (g.dim == 1) {
      double t = std::clamp((y[0] + g.R) / g.h, 0.0, double(g.n - 1));
      int i = std::min(int(t), g.n - 2);
      double f = t - i;
      return (1 - f) * (ricci_dual_[i].*m) + f * (ricci_dual_[i + 1].*m);
    }
    double tx = std::clamp((y[0] + g.R) / g.h, 0.0, double(g.n - 1));
    double ty = std::clamp((y[1] + g.R) / g.h, 0.0, double(g.n - 1));
    int i = std::min(int(tx), g.n - 2), j = std::min(int(ty), g.n - 2);
    double fx = tx - i, fy = ty - j;
    auto v = [&](int p, int q) { return ricci_dual_[g.index(p, q)].*m; };
    return (1 - fx) * (1 - fy) * v(i, j) + fx * (1 - fy) * v(i + 1, j) +
           (1 - fx) * fy * v(i, j + 1) + fx * fy * v(i + 1, j + 1);
  };
  Sym r{};
  r.xx = comp(&Sym::xx);
  if (g.dim == 2) {
    r.xy = comp(&Sym::xy);
    r.yy = comp(&Sym::yy);
  }
  return r;
}

double ReferenceGeometry::boundary_saturation() const {
  double worst = 0;
  int n = dgrid_.n;
  auto probe = [&](const Vec& y) {
    RefPoint p = at(y);
    worst = std::max(worst, poly_->min_l(p.x));
  };
  if (dgrid_.dim == 1) {
    probe(vec1(-dgrid_.R));
    probe(vec1(dgrid_.R));
  } else {
    int step = std::max(1, n / 16);
    for (int i = 0; i < n; i += step) {
      probe(vec2(dgrid_.coord(i), -dgrid_.R));
      probe(vec2(dgrid_.coord(i), dgrid_.R));
      probe(vec2(-dgrid_.R, dgrid_.coord(i)));
      probe(vec2(dgrid_.R, dgrid_.coord(i)));
    }
  }
  return worst;
}

}  // namespace tkrl
