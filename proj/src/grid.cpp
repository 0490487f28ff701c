#include "tkrl/grid.hpp"

#include <algorithm>
#include <cmath>

namespace tkrl {

Vec MomentGrid::node(size_t k) const {
  // binary search over row offsets
  size_t lo = 0, hi = rows.size() - 1;
  while (lo < hi) {
    size_t mid = (lo + hi + 1) / 2;
    if (rows[mid].offset <= k) lo = mid; else hi = mid - 1;
  }
  const Row& r = rows[lo];
  int i = r.imin + int(k - r.offset);
  if (dim == 1) return vec1(origin_x + i * h);
  return vec2(origin_x + i * h, origin_y + r.j * h);
}

size_t MomentGrid::index(int i, int j) const {
  const Row* r = row(j);
  if (!r || i < r->imin || i > r->imax) return count;
  return r->offset + size_t(i - r->imin);
}

const MomentGrid::Row* MomentGrid::row(int j) const {
  if (rows.empty() || j < rows.front().j || j > rows.back().j) return nullptr;
  return &rows[size_t(j - rows.front().j)];
}

MomentGrid make_moment_grid(const DelzantPolytope& p, double h, double delta) {
  if (h <= 0) throw ParameterError("moment grid: spacing must be positive");
  if (delta < 0) throw ParameterError("moment grid: delta must be nonnegative");

  MomentGrid g;
  g.poly = &p;
  g.dim = p.dim;
  g.h = h;
  g.delta = delta;

  long xmin = p.vertices[0][0], xmax = xmin, ymin = 0, ymax = 0;
  if (p.dim == 2) { ymin = p.vertices[0][1]; ymax = ymin; }
  for (const auto& v : p.vertices) {
    xmin = std::min(xmin, v[0]);
    xmax = std::max(xmax, v[0]);
    if (p.dim == 2) {
      ymin = std::min(ymin, v[1]);
      ymax = std::max(ymax, v[1]);
    }
  }
  g.origin_x = double(xmin);
  g.origin_y = double(ymin);

  auto inside = [&](int i, int j) {
    Vec x = p.dim == 1 ? vec1(g.origin_x + i * h)
                       : vec2(g.origin_x + i * h, g.origin_y + j * h);
    return p.min_l(x) >= delta;
  };

  int ni = int(std::floor((xmax - xmin) / h)) + 1;
  int nj = p.dim == 1 ? 1 : int(std::floor((ymax - ymin) / h)) + 1;

  const int stencil = 4;  // min run length for one-sided second-order stencils

  // candidate runs per row (convexity of P => one contiguous run per row)
  struct Run { int j, imin, imax; };
  std::vector<Run> runs;
  for (int j = 0; j < nj; ++j) {
    int a = -1, b = -1;
    for (int i = 0; i < ni; ++i) {
      if (inside(i, j)) {
        if (a < 0) a = i;
        b = i;
      }
    }
    if (a >= 0) runs.push_back({j, a, b});
  }
  if (runs.empty()) throw DegeneracyError("moment grid: no interior nodes at this spacing");

  if (p.dim == 2) {
    // prune rows/columns too short for the stencil.  The node region stays
    // convex throughout (we only intersect with horizontal/vertical bands),
    // so row and column extents are concave and short ones sit at the ends.
    bool changed = true;
    while (changed) {
      changed = false;
      {
        std::vector<Run> kept;
        for (const auto& r : runs)
          if (r.imax - r.imin + 1 >= stencil) kept.push_back(r);
          else changed = true;
        runs = kept;
      }
      if (runs.empty()) throw DegeneracyError("moment grid: spacing too coarse");
      int gimin = runs[0].imin, gimax = runs[0].imax;
      for (const auto& r : runs) {
        gimin = std::min(gimin, r.imin);
        gimax = std::max(gimax, r.imax);
      }
      // interval of columns tall enough for the stencil
      int ia = gimax + 1, ib = gimin - 1;
      for (int i = gimin; i <= gimax; ++i) {
        int cnt = 0;
        for (const auto& r : runs)
          if (i >= r.imin && i <= r.imax) ++cnt;
        if (cnt >= stencil) {
          ia = std::min(ia, i);
          ib = std::max(ib, i);
        }
      }
      if (ia > ib) throw DegeneracyError("moment grid: spacing too coarse");
      if (ia > gimin || ib < gimax) {
        std::vector<Run> kept;
        for (auto r : runs) {
          r.imin = std::max(r.imin, ia);
          r.imax = std::min(r.imax, ib);
          if (r.imin <= r.imax) kept.push_back(r);
        }
        runs = kept;
        changed = true;
        if (runs.empty()) throw DegeneracyError("moment grid: spacing too coarse");
      }
    }
    // rows must be consecutive for the transform passes
    for (size_t k = 1; k < runs.size(); ++k)
      if (runs[k].j != runs[k - 1].j + 1)
        throw DegeneracyError("moment grid: row gap after pruning");
  } else {
    if (runs[0].imax - runs[0].imin + 1 < stencil)
      throw DegeneracyError("moment grid: spacing too coarse");
  }

  size_t off = 0;
  for (const auto& r : runs) {
    g.rows.push_back({r.j, r.imin, r.imax, off});
    off += size_t(r.imax - r.imin + 1);
  }
  g.count = off;
  return g;
}

namespace {

// second-order first/second derivative along one run; pos = i - imin
void run_derivs(const GridFn& f, size_t base, int len, int pos, double h,
                double* d1, double* d2) {
  auto v = [&](int q) { return f[base + size_t(q)]; };
  if (pos >= 1 && pos <= len - 2) {
    if (d1) *d1 = (v(pos + 1) - v(pos - 1)) / (2 * h);
    if (d2) *d2 = (v(pos + 1) - 2 * v(pos) + v(pos - 1)) / (h * h);
  } else if (pos == 0) {
    if (d1) *d1 = (-3 * v(0) + 4 * v(1) - v(2)) / (2 * h);
    if (d2) *d2 = (2 * v(0) - 5 * v(1) + 4 * v(2) - v(3)) / (h * h);
  } else {
    if (d1) *d1 = (3 * v(len - 1) - 4 * v(len - 2) + v(len - 3)) / (2 * h);
    if (d2) *d2 = (2 * v(len - 1) - 5 * v(len - 2) + 4 * v(len - 3) - v(len - 4)) / (h * h);
  }
}

// locate (i, j, row) of flat index k
struct NodeLoc { int i, j; const MomentGrid::Row* r; };

NodeLoc locate(const MomentGrid& g, size_t k) {
  size_t lo = 0, hi = g.rows.size() - 1;
  while (lo < hi) {
    size_t mid = (lo + hi + 1) / 2;
    if (g.rows[mid].offset <= k) lo = mid; else hi = mid - 1;
  }
  const auto& r = g.rows[lo];
  return {r.imin + int(k - r.offset), r.j, &r};
}

// value at lattice (i, j); caller guarantees presence
double at(const MomentGrid& g, const GridFn& f, int i, int j) {
  return f[g.index(i, j)];
}

// derivative in x1 at lattice (i,j) using that row's run
double dx1(const MomentGrid& g, const GridFn& f, int i, int j) {
  const auto* r = g.row(j);
  double d1;
  run_derivs(f, r->offset, r->imax - r->imin + 1, i - r->imin, g.h, &d1, nullptr);
  return d1;
}

}  // namespace

Vec moment_grad(const MomentGrid& g, const GridFn& f, size_t k) {
  NodeLoc n = locate(g, k);
  Vec out{0, 0};
  run_derivs(f, n.r->offset, n.r->imax - n.r->imin + 1, n.i - n.r->imin, g.h,
             &out[0], nullptr);
  if (g.dim == 2) {
    // column run through (i, j)
    int jlo = n.j, jhi = n.j;
    while (g.index(n.i, jlo - 1) < g.count) --jlo;
    while (g.index(n.i, jhi + 1) < g.count) ++jhi;
    int len = jhi - jlo + 1, pos = n.j - jlo;
    auto v = [&](int q) { return at(g, f, n.i, jlo + q); };
    double h = g.h;
    if (pos >= 1 && pos <= len - 2)
      out[1] = (v(pos + 1) - v(pos - 1)) / (2 * h);
    else if (pos == 0)
      out[1] = (-3 * v(0) + 4 * v(1) - v(2)) / (2 * h);
    else
      out[1] = (3 * v(len - 1) - 4 * v(len - 2) + v(len - 3)) / (2 * h);
  }
  return out;
}

Sym moment_hess(const MomentGrid& g, const GridFn& f, size_t k) {
  NodeLoc n = locate(g, k);
  Sym out;
  run_derivs(f, n.r->offset, n.r->imax - n.r->imin + 1, n.i - n.r->imin, g.h,
             nullptr, &out.xx);
  if (g.dim == 2) {
    int jlo = n.j, jhi = n.j;
    while (g.index(n.i, jlo - 1) < g.count) --jlo;
    while (g.index(n.i, jhi + 1) < g.count) ++jhi;
    int len = jhi - jlo + 1, pos = n.j - jlo;
    auto v = [&](int q) { return at(g, f, n.i, jlo + q); };
    double h = g.h, h2 = g.h * g.h;
    if (pos >= 1 && pos <= len - 2)
      out.yy = (v(pos + 1) - 2 * v(pos) + v(pos - 1)) / h2;
    else if (pos == 0)
      out.yy = (2 * v(0) - 5 * v(1) + 4 * v(2) - v(3)) / h2;
    else
      out.yy = (2 * v(len - 1) - 5 * v(len - 2) + 4 * v(len - 3) - v(len - 4)) / h2;

    // cross derivative: difference of x1-derivatives along the column
    auto dv = [&](int q) { return dx1(g, f, n.i, jlo + q); };
    if (pos >= 1 && pos <= len - 2)
      out.xy = (dv(pos + 1) - dv(pos - 1)) / (2 * h);
    else if (pos == 0)
      out.xy = (-3 * dv(0) + 4 * dv(1) - dv(2)) / (2 * h);
    else
      out.xy = (3 * dv(len - 1) - 4 * dv(len - 2) + dv(len - 3)) / (2 * h);
  }
  return out;
}

namespace {

// area of the axis-aligned cell [cx +- h/2] x [cy +- h/2] intersected with P
// (Sutherland-Hodgman against the facet half-planes, then shoelace)
double cell_overlap_2d(const DelzantPolytope& p, double cx, double cy, double h) {
  std::vector<Vec> cell = {vec2(cx - h / 2, cy - h / 2),
                           vec2(cx + h / 2, cy - h / 2),
                           vec2(cx + h / 2, cy + h / 2),
                           vec2(cx - h / 2, cy + h / 2)};
  for (const auto& f : p.facets) {
    std::vector<Vec> out;
    size_t m = cell.size();
    for (size_t a = 0; a < m; ++a) {
      const Vec& A = cell[a];
      const Vec& B = cell[(a + 1) % m];
      double la = f.eval(A, 2), lb = f.eval(B, 2);
      if (la >= 0) out.push_back(A);
      if ((la >= 0) != (lb >= 0))
        out.push_back(add(A, scale(sub(B, A), la / (la - lb))));
    }
    cell.swap(out);
    if (cell.empty()) return 0;
  }
  double area = 0;
  for (size_t a = 0; a < cell.size(); ++a) {
    const Vec& A = cell[a];
    const Vec& B = cell[(a + 1) % cell.size()];
    area += A[0] * B[1] - B[0] * A[1];
  }
  return 0.5 * std::abs(area);
}

}  // namespace

GridFn quadrature_weights(const MomentGrid& g) {
  const DelzantPolytope& p = *g.poly;
  GridFn w(g.count, 0.0);
  double h = g.h;
  double lo0 = 1e300, hi0 = -1e300, lo1 = 1e300, hi1 = -1e300;
  for (const auto& v : p.vertices) {
    lo0 = std::min(lo0, double(v[0]));
    hi0 = std::max(hi0, double(v[0]));
    if (p.dim == 2) {
      lo1 = std::min(lo1, double(v[1]));
      hi1 = std::max(hi1, double(v[1]));
    }
  }
  auto nearest = [&](int i, int j) {
    long best = -1;
    size_t bk = 0;
    for (const auto& r : g.rows) {
      int ic = std::min(std::max(i, r.imin), r.imax);
      long di = ic - i, dj = r.j - j;
      long d2 = di * di + dj * dj;
      if (best < 0 || d2 < best) {
        best = d2;
        bk = r.offset + size_t(ic - r.imin);
      }
    }
    return bk;
  };
  if (g.dim == 1) {
    const auto& r = g.rows[0];
    int i0 = int(std::floor((lo0 - g.origin_x) / h)) - 1;
    int i1 = int(std::ceil((hi0 - g.origin_x) / h)) + 1;
    for (int i = i0; i <= i1; ++i) {
      double c = g.origin_x + i * h;
      double a = std::max(c - h / 2, lo0), b = std::min(c + h / 2, hi0);
      if (b <= a) continue;
      size_t k = g.index(i, r.j);
      if (k == g.count) k = nearest(i, r.j);
      w[k] += b - a;
    }
  } else {
    int i0 = int(std::floor((lo0 - g.origin_x) / h)) - 1;
    int i1 = int(std::ceil((hi0 - g.origin_x) / h)) + 1;
    int j0 = int(std::floor((lo1 - g.origin_y) / h)) - 1;
    int j1 = int(std::ceil((hi1 - g.origin_y) / h)) + 1;
    for (int j = j0; j <= j1; ++j) {
      for (int i = i0; i <= i1; ++i) {
        double a = cell_overlap_2d(p, g.origin_x + i * h, g.origin_y + j * h, h);
        if (a <= 0) continue;
        size_t k = g.index(i, j);
        if (k == g.count) k = nearest(i, j);
        w[k] += a;
      }
    }
  }
  // rescale so the weights sum to vol(P) exactly (clipping roundoff)
  double s = 0;
  for (double x : w) s += x;
  double scale = p.volume() / s;
  for (double& x : w) x *= scale;
  return w;
}

DualGrid make_dual_grid(int dim, double R, int nodes_per_axis) {
  if (dim != 1 && dim != 2) throw ParameterError("dual grid: dim must be 1 or 2");
  if (R <= 0 || nodes_per_axis < 4) throw ParameterError("dual grid: bad parameters");
  DualGrid g;
  g.dim = dim;
  g.R = R;
  g.n = nodes_per_axis;
  g.h = 2 * R / (nodes_per_axis - 1);
  return g;
}

double dual_interp(const DualGrid& g, const GridFn& f, const Vec& y) {
  auto clampc = [&](double t) {
    double s = (t + g.R) / g.h;
    return std::min(std::max(s, 0.0), double(g.n - 1));
  };
  double sx = clampc(y[0]);
  int i0 = std::min(int(sx), g.n - 2);
  double tx = sx - i0;
  if (g.dim == 1) return (1 - tx) * f[i0] + tx * f[i0 + 1];
  double sy = clampc(y[1]);
  int j0 = std::min(int(sy), g.n - 2);
  double ty = sy - j0;
  double a = (1 - tx) * f[g.index(i0, j0)] + tx * f[g.index(i0 + 1, j0)];
  double b = (1 - tx) * f[g.index(i0, j0 + 1)] + tx * f[g.index(i0 + 1, j0 + 1)];
  return (1 - ty) * a + ty * b;
}

double dual_max_refined(const DualGrid& g, const GridFn& f) {
  size_t best = 0;
  for (size_t k = 1; k < f.size(); ++k)
    if (f[k] > f[best]) best = k;
  double v = f[best];
  auto refine1 = [&](double fm, double f0, double fp) {
    double den = fm - 2 * f0 + fp;
    if (den >= 0) return f0;  // not a strict local max profile
    double d = 0.5 * (fm - fp) / den;
    d = std::min(std::max(d, -1.0), 1.0);
    return f0 + d * 0.5 * (fp - fm) + 0.5 * d * d * den;
  };
  if (g.dim == 1) {
    int i = int(best);
    if (i > 0 && i < g.n - 1) v = refine1(f[i - 1], f[i], f[i + 1]);
  } else {
    int i = int(best % g.n), j = int(best / g.n);
    if (i > 0 && i < g.n - 1 && j > 0 && j < g.n - 1) {
      // separable refinement in each axis
      double vx = refine1(f[g.index(i - 1, j)], f[best], f[g.index(i + 1, j)]);
      double vy = refine1(f[g.index(i, j - 1)], f[best], f[g.index(i, j + 1)]);
      v = f[best] + (vx - f[best]) + (vy - f[best]);
    }
  }
  return v;
}

double dual_min_refined(const DualGrid& g, const GridFn& f) {
  GridFn neg(f.size());
  for (size_t k = 0; k < f.size(); ++k) neg[k] = -f[k];
  return -dual_max_refined(g, neg);
}

}  // namespace tkrl
