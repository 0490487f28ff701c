/// Moment-polytope quadrature grid and the dual (log-affine) box grid.
#pragma once

#include <cstddef>
#include <vector>

#include "tkrl/core.hpp"
#include "tkrl/polytope.hpp"

namespace tkrl {

/// Uniform lattice restricted to the delta-interior of the polytope.
///
/// Nodes are lattice points x = origin + (i,j)*h with min_i l_i(x) >= delta.
/// For a convex polytope every row (fixed j) is a contiguous run of i's; rows
/// and columns shorter than the finite-difference stencil width are pruned so
/// that every node supports second-order one-sided stencils.
struct MomentGrid {
  const DelzantPolytope* poly = nullptr;
  int dim = 1;
  double h = 0;
  double delta = 0;
  double origin_x = 0, origin_y = 0;

  struct Row {
    int j;            // lattice row index (x2 = origin_y + j*h)
    int imin, imax;   // inclusive lattice column range
    size_t offset;    // index of (imin, j) in flat storage
  };
  std::vector<Row> rows;  // consecutive j's
  size_t count = 0;

  /// Quadrature weight of one node (midpoint rule).
  double node_weight() const { return dim == 1 ? h : h * h; }
  double total_weight() const { return count * node_weight(); }

  Vec node(size_t k) const;
  size_t size() const { return count; }

  // lattice lookup; returns size() if absent
  size_t index(int i, int j) const;
  const Row* row(int j) const;

  int jmin() const { return rows.front().j; }
  int jmax() const { return rows.back().j; }
};

MomentGrid make_moment_grid(const DelzantPolytope& p, double h, double delta);

/// Second-order quadrature weights: each node carries the exact area of its
/// lattice cell clipped to P; cells whose node was excluded (margin or
/// stencil pruning) donate their clipped area to the nearest retained node.
/// The weights sum to vol(P) exactly, so constants integrate exactly and
/// smooth integrands see O(h^2) error instead of the O(h) of a plain mean.
GridFn quadrature_weights(const MomentGrid& g);

/// Gradient and Hessian of a moment-grid function by second-order finite
/// differences (centered where possible, one-sided at run ends).
Vec moment_grad(const MomentGrid& g, const GridFn& f, size_t k);
Sym moment_hess(const MomentGrid& g, const GridFn& f, size_t k);

/// Uniform box [-R, R]^dim.
struct DualGrid {
  int dim = 1;
  double R = 0;
  int n = 0;  // nodes per axis
  double h = 0;

  size_t size() const { return dim == 1 ? size_t(n) : size_t(n) * n; }
  double coord(int i) const { return -R + i * h; }
  Vec node(size_t k) const {
    if (dim == 1) return vec1(coord(int(k)));
    return vec2(coord(int(k % n)), coord(int(k / n)));
  }
  size_t index(int i, int j) const { return size_t(j) * n + i; }
};

DualGrid make_dual_grid(int dim, double R, int nodes_per_axis);

/// Bilinear interpolation of a dual-grid function (clamped to the box).
double dual_interp(const DualGrid& g, const GridFn& f, const Vec& y);

/// Max/min over nodes with a local quadratic refinement at interior argmax
/// (returns the refined extremum estimate).
double dual_max_refined(const DualGrid& g, const GridFn& f);
double dual_min_refined(const DualGrid& g, const GridFn& f);

}  // namespace tkrl
