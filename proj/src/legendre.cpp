#include "tkrl/legendre.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tkrl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

void legendre_1d(double y0, double hy, const double* f, int n,
                 const double* xs, int m, double* out, int* argout,
                 bool refine) {
  // upper envelope of the lines x -> x*y_j - f_j (slopes strictly increasing)
  std::vector<int> hull;
  hull.reserve(static_cast<size_t>(n));
  auto slope = [&](int j) { return y0 + j * hy; };
  auto cross_at = [&](int a, int b) {
    // abscissa where line b overtakes line a (slope(b) > slope(a))
    return (f[b] - f[a]) / (slope(b) - slope(a));
  };
  for (int j = 0; j < n; ++j) {
    if (f[j] == kInf) continue;
    while (hull.size() >= 2 &&
           cross_at(hull[hull.size() - 2], j) <=
               cross_at(hull[hull.size() - 2], hull.back()))
      hull.pop_back();
    hull.push_back(j);
  }
  if (hull.empty()) throw DegeneracyError("legendre_1d: no finite sources");

  auto val = [&](int j, double x) { return x * slope(j) - f[j]; };
  size_t p = 0;
  for (int q = 0; q < m; ++q) {
    double x = xs[q];
    while (p + 1 < hull.size() && val(hull[p + 1], x) >= val(hull[p], x)) ++p;
    int j = hull[p];
    double v = val(j, x);
    if (refine && j >= 1 && j <= n - 2 && f[j - 1] != kInf && f[j + 1] != kInf) {
      // quadratic model of f around y_j; maximize x*(y_j+d) - model(d)
      double gam = (f[j - 1] - 2 * f[j] + f[j + 1]) / (hy * hy);
      if (gam > 0) {
        double beta = (f[j + 1] - f[j - 1]) / (2 * hy);
        double d = (x - beta) / gam;
        d = std::min(std::max(d, -hy), hy);
        double dv = (x - beta) * d - 0.5 * gam * d * d;
        if (dv > 0) v += dv;
      }
    }
    out[q] = v;
    if (argout) argout[q] = j;
  }
}

std::vector<double> envelope_1d(double /*y0*/, double hy,
                                const std::vector<double>& f) {
  int n = int(f.size());
  // lower hull of (y_j, f_j) by monotone chain (points already sorted in y)
  std::vector<int> hull;
  for (int j = 0; j < n; ++j) {
    while (hull.size() >= 2) {
      int a = hull[hull.size() - 2], b = hull.back();
      // pop b if it lies on or above chord a--j
      double cr = (double(b - a) * hy) * (f[j] - f[a]) -
                  (double(j - a) * hy) * (f[b] - f[a]);
      if (cr <= 0) hull.pop_back(); else break;
    }
    hull.push_back(j);
  }
  std::vector<double> env(static_cast<size_t>(n));
  size_t seg = 0;
  for (int j = 0; j < n; ++j) {
    while (seg + 1 < hull.size() && hull[seg + 1] <= j) ++seg;
    if (hull[seg] == j || seg + 1 == hull.size()) {
      env[size_t(j)] = f[hull[seg]];
    } else {
      int a = hull[seg], b = hull[seg + 1];
      double t = double(j - a) / double(b - a);
      env[size_t(j)] = (1 - t) * f[a] + t * f[b];
    }
  }
  return env;
}

double convexity_gap_1d(double y0, double hy, const std::vector<double>& f) {
  auto env = envelope_1d(y0, hy, f);
  double g = 0;
  for (size_t j = 0; j < f.size(); ++j) g = std::max(g, f[j] - env[j]);
  return g;
}

std::vector<double> envelope_2d(int nx, int ny, double x0, double hx,
                                double y0, double hy,
                                const std::vector<double>& f, int slope_res) {
  // double discrete transform with a uniform slope grid in each axis
  double pmin = kInf, pmax = -kInf, qmin = kInf, qmax = -kInf;
  auto fa = [&](int i, int j) { return f[size_t(j) * nx + i]; };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i + 1 < nx; ++i) {
      if (fa(i, j) == kInf || fa(i + 1, j) == kInf) continue;
      double s = (fa(i + 1, j) - fa(i, j)) / hx;
      pmin = std::min(pmin, s);
      pmax = std::max(pmax, s);
    }
  for (int j = 0; j + 1 < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      if (fa(i, j) == kInf || fa(i, j + 1) == kInf) continue;
      double s = (fa(i, j + 1) - fa(i, j)) / hy;
      qmin = std::min(qmin, s);
      qmax = std::max(qmax, s);
    }
  if (pmin > pmax || qmin > qmax)
    throw DegeneracyError("envelope_2d: not enough finite data");
  double pad_p = 0.05 * (pmax - pmin) + 1e-9;
  double pad_q = 0.05 * (qmax - qmin) + 1e-9;
  pmin -= pad_p; pmax += pad_p; qmin -= pad_q; qmax += pad_q;
  int ns = std::max(slope_res, 8);
  double hp = (pmax - pmin) / (ns - 1), hq = (qmax - qmin) / (ns - 1);

  std::vector<double> ps(static_cast<size_t>(ns)), qs(static_cast<size_t>(ns));
  for (int a = 0; a < ns; ++a) { ps[size_t(a)] = pmin + a * hp; qs[size_t(a)] = qmin + a * hq; }

  // A[j][a] = sup_i (p_a * x_i - f(i,j))
  std::vector<double> A(size_t(ny) * ns, -kInf);
  std::vector<double> col(static_cast<size_t>(nx));
  for (int j = 0; j < ny; ++j) {
    bool any = false;
    for (int i = 0; i < nx; ++i) { col[size_t(i)] = fa(i, j); any |= (col[size_t(i)] != kInf); }
    if (!any) continue;
    legendre_1d(x0, hx, col.data(), nx, ps.data(), ns, &A[size_t(j) * ns], nullptr, false);
  }
  // G[a][b] = sup_j (q_b * y_j - (-A[j][a]))
  std::vector<double> G(size_t(ns) * ns);
  std::vector<double> tmp(static_cast<size_t>(ny));
  for (int a = 0; a < ns; ++a) {
    for (int j = 0; j < ny; ++j) {
      double v = A[size_t(j) * ns + a];
      tmp[size_t(j)] = (v == -kInf) ? kInf : -v;
    }
    legendre_1d(y0, hy, tmp.data(), ny, qs.data(), ns, &G[size_t(a) * ns], nullptr, false);
  }
  // env(x,y) = sup_{a,b} (p_a x + q_b y - G[a][b])
  // pass back: B[a][j] = sup_b (q_b * y_j - G[a][b]) needs G indexed by b per a
  std::vector<double> ys(static_cast<size_t>(ny)), xsv(static_cast<size_t>(nx));
  for (int j = 0; j < ny; ++j) ys[size_t(j)] = y0 + j * hy;
  for (int i = 0; i < nx; ++i) xsv[size_t(i)] = x0 + i * hx;
  std::vector<double> B(size_t(ns) * ny);
  for (int a = 0; a < ns; ++a)
    legendre_1d(qmin, hq, &G[size_t(a) * ns], ns, ys.data(), ny, &B[size_t(a) * ny], nullptr, false);
  std::vector<double> env(f.size(), kInf);
  std::vector<double> line(static_cast<size_t>(ns));
  std::vector<double> row(static_cast<size_t>(nx));
  for (int j = 0; j < ny; ++j) {
    for (int a = 0; a < ns; ++a) line[size_t(a)] = -B[size_t(a) * ny + j];
    legendre_1d(pmin, hp, line.data(), ns, xsv.data(), nx, row.data(), nullptr, false);
    for (int i = 0; i < nx; ++i)
      if (fa(i, j) != kInf) env[size_t(j) * nx + i] = row[size_t(i)];
  }
  return env;
}

GridFn dual_from_moment(const MomentGrid& mg, const GridFn& s,
                        const DualGrid& dg, bool refine) {
  if (s.size() != mg.size()) throw ParameterError("dual_from_moment: size mismatch");
  std::vector<double> targets(static_cast<size_t>(dg.n));
  for (int a = 0; a < dg.n; ++a) targets[size_t(a)] = dg.coord(a);

  if (mg.dim == 1) {
    const auto& r = mg.rows[0];
    GridFn out(static_cast<size_t>(dg.n));
    legendre_1d(mg.origin_x + r.imin * mg.h, mg.h, s.data() + r.offset,
                r.imax - r.imin + 1, targets.data(), dg.n, out.data(), nullptr,
                refine);
    return out;
  }

  size_t nrows = mg.rows.size();
  // pass 1: per moment row, transform in x1 onto dual y1 coordinates
  std::vector<double> T(nrows * size_t(dg.n));
  for (size_t r = 0; r < nrows; ++r) {
    const auto& row = mg.rows[r];
    legendre_1d(mg.origin_x + row.imin * mg.h, mg.h, s.data() + row.offset,
                row.imax - row.imin + 1, targets.data(), dg.n,
                &T[r * size_t(dg.n)], nullptr, refine);
  }
  // pass 2: per dual y1 column, transform in x2
  GridFn out(dg.size());
  double x2_0 = mg.origin_y + mg.rows[0].j * mg.h;
  std::vector<double> colf(nrows), colo(static_cast<size_t>(dg.n));
  for (int a = 0; a < dg.n; ++a) {
    for (size_t r = 0; r < nrows; ++r) colf[r] = -T[r * size_t(dg.n) + a];
    legendre_1d(x2_0, mg.h, colf.data(), int(nrows), targets.data(), dg.n,
                colo.data(), nullptr, refine);
    for (int b = 0; b < dg.n; ++b) out[dg.index(a, b)] = colo[size_t(b)];
  }
  return out;
}

GridFn moment_from_dual(const DualGrid& dg, const GridFn& phi,
                        const MomentGrid& mg, bool refine) {
  if (phi.size() != dg.size()) throw ParameterError("moment_from_dual: size mismatch");
  if (mg.dim == 1) {
    const auto& r = mg.rows[0];
    int len = r.imax - r.imin + 1;
    std::vector<double> xs(static_cast<size_t>(len));
    for (int i = 0; i < len; ++i) xs[size_t(i)] = mg.origin_x + (r.imin + i) * mg.h;
    GridFn out(mg.size());
    legendre_1d(-dg.R, dg.h, phi.data(), dg.n, xs.data(), len, out.data(),
                nullptr, refine);
    return out;
  }

  int gimin = mg.rows[0].imin, gimax = mg.rows[0].imax;
  for (const auto& r : mg.rows) {
    gimin = std::min(gimin, r.imin);
    gimax = std::max(gimax, r.imax);
  }
  int nxi = gimax - gimin + 1;
  std::vector<double> x1s(static_cast<size_t>(nxi));
  for (int i = 0; i < nxi; ++i) x1s[size_t(i)] = mg.origin_x + (gimin + i) * mg.h;

  // pass 1: per dual row (fixed y2), transform in y1 onto moment x1 values
  std::vector<double> U(size_t(dg.n) * nxi);
  for (int b = 0; b < dg.n; ++b)
    legendre_1d(-dg.R, dg.h, phi.data() + size_t(b) * dg.n, dg.n, x1s.data(),
                nxi, &U[size_t(b) * nxi], nullptr, refine);

  // pass 2: per x1 column, transform in y2 onto the x2 values of the rows
  int nrows = int(mg.rows.size());
  std::vector<double> x2s(static_cast<size_t>(nrows));
  for (int r = 0; r < nrows; ++r)
    x2s[size_t(r)] = mg.origin_y + mg.rows[size_t(r)].j * mg.h;
  GridFn out(mg.size());
  std::vector<double> colf(static_cast<size_t>(dg.n));
  std::vector<double> colo(static_cast<size_t>(nrows));
  for (int i = 0; i < nxi; ++i) {
    for (int b = 0; b < dg.n; ++b) colf[size_t(b)] = -U[size_t(b) * nxi + i];
    legendre_1d(-dg.R, dg.h, colf.data(), dg.n, x2s.data(), nrows, colo.data(),
                nullptr, refine);
    int ilat = gimin + i;
    for (int r = 0; r < nrows; ++r) {
      size_t k = mg.index(ilat, mg.rows[size_t(r)].j);
      if (k < mg.size()) out[k] = colo[size_t(r)];
    }
  }
  return out;
}

ConjugateEvaluator::ConjugateEvaluator(const MomentGrid& mg, const GridFn& s)
    : mg_(mg), s_(s), warm_(0) {
  if (s.size() != mg.size()) throw ParameterError("ConjugateEvaluator: size mismatch");
  size_t stride = std::max<size_t>(1, mg.size() / 64);
  for (size_t k = 0; k < mg.size(); k += stride) coarse_.push_back(k);
}

double ConjugateEvaluator::eval(const Vec& y, Vec* argmax) const {
  auto F = [&](size_t k) {
    return dot(mg_.node(k), y, mg_.dim) - s_[k];
  };
  size_t best = warm_;
  double bv = F(best);
  for (size_t k : coarse_) {
    double v = F(k);
    if (v > bv) { bv = v; best = k; }
  }
  // hill-climb over lattice neighbors (8-connected in 2D)
  for (size_t iter = 0; iter < mg_.size(); ++iter) {
    // locate lattice coordinates of `best`
    size_t lo = 0, hi = mg_.rows.size() - 1;
    while (lo < hi) {
      size_t mid = (lo + hi + 1) / 2;
      if (mg_.rows[mid].offset <= best) lo = mid; else hi = mid - 1;
    }
    int i = mg_.rows[lo].imin + int(best - mg_.rows[lo].offset);
    int j = mg_.rows[lo].j;
    size_t nb = best;
    double nv = bv;
    int djmax = mg_.dim == 1 ? 0 : 1;
    for (int dj = -djmax; dj <= djmax; ++dj)
      for (int di = -1; di <= 1; ++di) {
        if (di == 0 && dj == 0) continue;
        size_t k = mg_.index(i + di, j + dj);
        if (k >= mg_.size()) continue;
        double v = F(k);
        if (v > nv) { nv = v; nb = k; }
      }
    if (nb == best) break;
    best = nb;
    bv = nv;
  }
  warm_ = best;

  Vec xb = mg_.node(best);
  double val = bv;
  // quadratic refinement: model F near the node, step to its stationary point
  Vec gs = moment_grad(mg_, s_, best);
  Sym hs = moment_hess(mg_, s_, best);
  Vec gF = sub(y, gs);
  // require -H_F = D^2 s positive definite
  bool pd = mg_.dim == 1 ? hs.xx > 0 : (hs.xx > 0 && hs.det(2) > 0);
  if (pd) {
    Vec d = hs.solve(gF, mg_.dim);
    double dn = norm(d, mg_.dim);
    double cap = 1.5 * mg_.h;
    if (dn > cap) d = scale(d, cap / dn);
    double dv = dot(gF, d, mg_.dim) - 0.5 * dot(d, hs.apply(d, mg_.dim), mg_.dim);
    if (dv > 0) {
      val += dv;
      xb = add(xb, d);
    }
  }
  if (argmax) *argmax = xb;
  return val;
}

}  // namespace tkrl
