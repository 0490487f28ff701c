/// Discrete Legendre transforms, convex envelopes, and pointwise
/// conjugate evaluation.
///
/// The core primitive is the exact max-plus transform over a uniform 1D
/// lattice (upper envelope of lines, O(n + m)).  An optional parabolic
/// refinement fits a local quadratic around the discrete argmax, recovering
/// third-order accuracy for smooth convex inputs; the refined value is never
/// below the unrefined one.  Two-dimensional transforms factor into two 1D
/// passes.
#pragma once

#include <vector>

#include "tkrl/core.hpp"
#include "tkrl/grid.hpp"

namespace tkrl {

/// sup_j (x * y_j - f_j) over sources y_j = y0 + j*hy, j = 0..n-1, for every
/// (sorted ascending) target x in xs.  Writes values to out and, when argout
/// is non-null, the discrete argmax index.
void legendre_1d(double y0, double hy, const double* f, int n,
                 const double* xs, int m, double* out, int* argout,
                 bool refine);

/// Convex envelope of f over nodes y_j = y0 + j*hy (exact lower hull).
std::vector<double> envelope_1d(double y0, double hy,
                                const std::vector<double>& f);

/// Convex envelope on a rectangular lattice via a double discrete transform
/// with a slope grid.  Entries equal to +infinity mark absent nodes (their
/// output is also +infinity).  Result is <= f and convex along lattice lines;
/// in 2D this is an approximation from below of the true envelope.
std::vector<double> envelope_2d(int nx, int ny, double x0, double hx,
                                double y0, double hy,
                                const std::vector<double>& f,
                                int slope_res = 1024);

/// Max over nodes of f - envelope(f): 0 for discretely convex data.
double convexity_gap_1d(double y0, double hy, const std::vector<double>& f);

/// Discrete Legendre transform of s (moment grid) onto the dual grid.
GridFn dual_from_moment(const MomentGrid& mg, const GridFn& s,
                        const DualGrid& dg, bool refine);

/// Discrete Legendre transform of phi (dual grid) onto the moment grid.
GridFn moment_from_dual(const DualGrid& dg, const GridFn& phi,
                        const MomentGrid& mg, bool refine);

/// Pointwise conjugate of a moment-grid function:
///   eval(y) = sup_x (<x,y> - s(x)),
/// computed by hill-climb over the lattice from a warm start, then a local
/// quadratic refinement using finite differences of s.  Stateless apart from
/// the cached warm start.
class ConjugateEvaluator {
 public:
  ConjugateEvaluator(const MomentGrid& mg, const GridFn& s);

  /// Value of the conjugate at y; also reports the (refined) argmax point.
  double eval(const Vec& y, Vec* argmax = nullptr) const;

 private:
  const MomentGrid& mg_;
  const GridFn& s_;
  std::vector<size_t> coarse_;   // subsample for cold starts
  mutable size_t warm_;
};

}  // namespace tkrl
