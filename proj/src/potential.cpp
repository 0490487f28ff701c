#include "tkrl/potential.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace tkrl {

namespace {

double finite_osc(const GridFn& f, double* maxabs = nullptr) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo, ma = 0;
  for (double x : f) {
    if (!std::isfinite(x)) continue;
    lo = std::min(lo, x);
    hi = std::max(hi, x);
    ma = std::max(ma, std::abs(x));
  }
  if (maxabs) *maxabs = ma;
  return hi > lo ? hi - lo : 0.0;
}

// Second differences along lattice lines (rows, columns and both diagonals
// in 2D) must not dip below -eps.  Necessary conditions for discrete
// convexity; cheap enough to run at every construction.
void check_convex_moment(const MomentGrid& g, const GridFn& f,
                         const char* what) {
  double eps = eps_cvx(f);
  auto fail = [&](int i, int j, double d2) {
    std::ostringstream os;
    os << what << " not discretely convex at lattice node (" << i << "," << j
       << "): second difference " << d2 << " < -" << eps;
    throw ConvexityError(os.str());
  };
  for (const auto& r : g.rows) {
    for (int i = r.imin + 1; i < r.imax; ++i) {
      size_t k = r.offset + size_t(i - r.imin);
      double d2 = f[k - 1] - 2 * f[k] + f[k + 1];
      if (d2 < -eps) fail(i, r.j, d2);
    }
  }
  if (g.dim == 2) {
    size_t absent = g.size();
    const int dirs[3][2] = {{0, 1}, {1, 1}, {-1, 1}};
    for (const auto& r : g.rows) {
      for (int i = r.imin; i <= r.imax; ++i) {
        size_t k = r.offset + size_t(i - r.imin);
        for (const auto& d : dirs) {
          size_t a = g.index(i - d[0], r.j - d[1]);
          size_t b = g.index(i + d[0], r.j + d[1]);
          if (a == absent || b == absent) continue;
          double d2 = f[a] - 2 * f[k] + f[b];
          if (d2 < -eps) fail(i, r.j, d2);
        }
      }
    }
  }
}

void check_convex_dual(const DualGrid& g, const GridFn& f, const char* what,
                       double floor = 0) {
  double eps = std::max(eps_cvx(f), floor);
  auto fail = [&](int i, int j, double d2) {
    std::ostringstream os;
    os << what << " not discretely convex at dual node (" << i << "," << j
       << "): second difference " << d2 << " < -" << eps;
    throw ConvexityError(os.str());
  };
  int n = g.n;
  if (g.dim == 1) {
    for (int i = 1; i + 1 < n; ++i) {
      double d2 = f[i - 1] - 2 * f[i] + f[i + 1];
      if (d2 < -eps) fail(i, 0, d2);
    }
    return;
  }
  const int dirs[4][2] = {{1, 0}, {0, 1}, {1, 1}, {-1, 1}};
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      size_t k = g.index(i, j);
      for (const auto& d : dirs) {
        int ia = i - d[0], ja = j - d[1], ib = i + d[0], jb = j + d[1];
        if (ia < 0 || ib < 0 || ja < 0 || ia >= n || ib >= n || jb >= n)
          continue;
        double d2 = f[g.index(ia, ja)] - 2 * f[k] + f[g.index(ib, jb)];
        if (d2 < -eps) fail(i, j, d2);
      }
    }
  }
}

}  // namespace

double eps_cvx(const GridFn& f) {
  double maxabs = 0;
  double osc = finite_osc(f, &maxabs);
  // floating-point floor: exact affine data rounds at machine precision
  return 1e-8 * osc + 1e-13 * (1.0 + maxabs);
}

GridFn legendre_to_dual(const ReferenceGeometry& ref, const GridFn& s_moment) {
  if (s_moment.size() != ref.mgrid().size())
    throw ParameterError("legendre_to_dual: size mismatch");
  check_convex_moment(ref.mgrid(), s_moment, "symplectic input");
  return dual_from_moment(ref.mgrid(), s_moment, ref.dgrid(), true);
}

GridFn legendre_to_moment(const ReferenceGeometry& ref, const GridFn& phi_dual) {
  if (phi_dual.size() != ref.dgrid().size())
    throw ParameterError("legendre_to_moment: size mismatch");
  check_convex_dual(ref.dgrid(), phi_dual, "dual input");
  return moment_from_dual(ref.dgrid(), phi_dual, ref.mgrid(), true);
}

GridFn convexity_project(const DualGrid& g, const GridFn& f) {
  if (f.size() != g.size()) throw ParameterError("convexity_project: size mismatch");
  if (g.dim == 1) return envelope_1d(-g.R, g.h, f);
  return envelope_2d(g.n, g.n, -g.R, g.h, -g.R, g.h, f);
}

PotentialField::PotentialField(const ReferenceGeometry& ref, GridFn v)
    : ref_(&ref), v_(std::move(v)) {
  if (v_.size() != ref.mgrid().size())
    throw ParameterError("potential: correction size mismatch");
  for (double x : v_)
    if (!std::isfinite(x)) throw ParameterError("potential: non-finite entry");
}

PotentialField PotentialField::from_symplectic(const ReferenceGeometry& ref,
                                               const GridFn& s) {
  if (s.size() != ref.mgrid().size())
    throw ParameterError("from_symplectic: size mismatch");
  check_convex_moment(ref.mgrid(), s, "symplectic potential");
  GridFn v(s.size());
  for (size_t k = 0; k < s.size(); ++k) v[k] = s[k] - ref.g_vals()[k];
  return PotentialField(ref, std::move(v));
}

PotentialField PotentialField::from_v(const ReferenceGeometry& ref, GridFn v) {
  if (v.size() != ref.mgrid().size())
    throw ParameterError("from_v: size mismatch");
  GridFn s(v.size());
  for (size_t k = 0; k < v.size(); ++k) s[k] = ref.g_vals()[k] + v[k];
  check_convex_moment(ref.mgrid(), s, "symplectic potential");
  return PotentialField(ref, std::move(v));
}

PotentialField PotentialField::from_dual(const ReferenceGeometry& ref,
                                         const GridFn& u) {
  if (u.size() != ref.dgrid().size())
    throw ParameterError("from_dual: size mismatch");
  // Use the Newton-precision reference values here: the transform-based
  // phi_ref_grid carries tail saturation and second-difference noise that
  // would pollute both the convexity gate and the recovered correction.
  // (Transform-derived u still carries the reference error band, hence the
  // calibrated noise floor in the tolerance.)
  GridFn phi(u.size());
  for (size_t k = 0; k < u.size(); ++k) phi[k] = ref.phi_ref_dual()[k] + u[k];
  check_convex_dual(ref.dgrid(), phi, "Kahler potential",
                    ref.cvx_noise_floor());
  GridFn s = moment_from_dual(ref.dgrid(), phi, ref.mgrid(), true);
  GridFn v(s.size());
  for (size_t k = 0; k < s.size(); ++k) v[k] = s[k] - ref.g_vals()[k];
  PotentialField p(ref, std::move(v));
  return p;
}

PotentialField PotentialField::zero(const ReferenceGeometry& ref) {
  return PotentialField(ref, GridFn(ref.mgrid().size(), 0.0));
}

GridFn PotentialField::symplectic() const {
  GridFn s(v_.size());
  for (size_t k = 0; k < v_.size(); ++k) s[k] = ref_->g_vals()[k] + v_[k];
  return s;
}

const GridFn& PotentialField::u() const {
  if (!u_) {
    GridFn phi = dual_from_moment(ref_->mgrid(), symplectic(), ref_->dgrid(), true);
    GridFn u(phi.size());
    for (size_t k = 0; k < phi.size(); ++k) {
      u[k] = phi[k] - ref_->phi_ref_grid()[k];
      if (!std::isfinite(u[k]))
        throw DegeneracyError("relative potential unbounded on the dual box");
    }
    u_ = std::move(u);
  }
  return *u_;
}

double PotentialField::sup() const { return dual_max_refined(ref_->dgrid(), u()); }
double PotentialField::inf() const { return dual_min_refined(ref_->dgrid(), u()); }

const PotentialField::Pullback& PotentialField::pullback() const {
  if (!pb_) {
    const MomentGrid& mg = ref_->mgrid();
    size_t n = mg.size();
    Pullback pb;
    pb.y.resize(n);
    pb.det_s.resize(n);
    pb.u_at_y.resize(n);
    pb.phi_ref_at_y.resize(n);
    pb.logdet_ref.resize(n);
    pb.f_omega_at_y.resize(n);
    pb.hess_s.resize(n);
    pb.hess_ref_y.resize(n);
    int dim = ref_->dim();
    for (size_t k = 0; k < n; ++k) {
      Vec x = mg.node(k);
      Vec y = add(ref_->g_grad(k), moment_grad(mg, v_, k));
      Sym S = ref_->g_hess(k).plus(moment_hess(mg, v_, k));
      double d = S.det(dim);
      if (d <= 0) {
        std::ostringstream os;
        os << "degenerate symplectic Hessian at x = (" << x[0] << "," << x[1]
           << "): det = " << d;
        throw DegeneracyError(os.str());
      }
      // Young's identity at y = grad s(x): phi(y) = <x,y> - s(x) exactly.
      double phi_y = dot(x, y, dim) - ref_->g_vals()[k] - v_[k];
      ReferenceGeometry::RefPoint rp = ref_->at(y, &x);
      pb.y[k] = y;
      pb.det_s[k] = d;
      pb.phi_ref_at_y[k] = rp.phi;
      pb.u_at_y[k] = phi_y - rp.phi;
      pb.logdet_ref[k] = rp.logdet;
      pb.f_omega_at_y[k] = rp.f_omega;
      pb.hess_s[k] = S;
      pb.hess_ref_y[k] = ref_->poly().guillemin_hess(rp.x).inverse(dim);
    }
    pb_ = std::move(pb);
  }
  return *pb_;
}

double PotentialField::integrate(const GridFn& G_at_nodes) const {
  size_t n = ref_->mgrid().size();
  if (G_at_nodes.size() != n)
    throw ParameterError("integrate: integrand size mismatch");
  // Vol(X) * weighted polytope mean: exact on constants (mass conservation)
  // and second order on smooth integrands via the cell-overlap weights.
  return ref_->VolX() * ref_->weighted_mean(G_at_nodes);
}

GridFn PotentialField::ma_density_ratio() const {
  const Pullback& pb = pullback();
  size_t n = pb.det_s.size();
  GridFn r(n);
  for (size_t k = 0; k < n; ++k) {
    // det D^2 phi_u(y_k) = 1 / det D^2 s(x_k)
    r[k] = std::exp(-pb.logdet_ref[k]) / pb.det_s[k];
    if (!(r[k] > 0) || !std::isfinite(r[k]))
      throw DegeneracyError("non-positive Monge-Ampere density ratio");
  }
  return r;
}

double PotentialField::phi_at(const Vec& y, Vec* argmax) const {
  if (!conj_) {
    s_for_conj_ = symplectic();
    conj_ = std::make_shared<ConjugateEvaluator>(ref_->mgrid(), s_for_conj_);
  }
  return conj_->eval(y, argmax);
}

void PotentialField::save(const std::string& path) const {
  nlohmann::json hdr;
  hdr["format"] = "TKRL1";
  hdr["kind"] = "potential";
  hdr["manifold"] = ref_->poly().name;
  hdr["dim"] = ref_->dim();
  hdr["moment_h"] = ref_->mgrid().h;
  hdr["count"] = v_.size();
  hdr["dual_R"] = ref_->dgrid().R;
  hdr["dual_nodes"] = ref_->dgrid().n;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f << hdr.dump() << '\n';
  f.write(reinterpret_cast<const char*>(v_.data()),
          std::streamsize(v_.size() * sizeof(double)));
  if (!f) throw IoError("write failed: " + path);
}

PotentialField PotentialField::load(const std::string& path,
                                    const ReferenceGeometry& ref) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(f, line)) throw IoError("truncated header: " + path);
  nlohmann::json hdr = nlohmann::json::parse(line, nullptr, false);
  if (hdr.is_discarded() || hdr.value("format", "") != "TKRL1" ||
      hdr.value("kind", "") != "potential")
    throw IoError("not a TKRL1 potential file: " + path);
  if (hdr.value("manifold", "") != ref.poly().name)
    throw IoError("manifold mismatch in " + path);
  size_t n = hdr.value("count", size_t(0));
  if (n != ref.mgrid().size())
    throw IoError("grid mismatch in " + path);
  GridFn v(n);
  f.read(reinterpret_cast<char*>(v.data()), std::streamsize(n * sizeof(double)));
  if (!f) throw IoError("truncated data: " + path);
  return PotentialField(ref, std::move(v));
}

}  // namespace tkrl
