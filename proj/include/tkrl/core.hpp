/// Small fixed-dimension linear algebra and common error types.
///
/// Everything in this lab lives in dimension 1 or 2, so vectors and
/// symmetric matrices are plain arrays with the active dimension carried
/// by the surrounding object.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace tkrl {

using Vec = std::array<double, 2>;

inline Vec vec1(double x) { return {x, 0.0}; }
inline Vec vec2(double x, double y) { return {x, y}; }

inline double dot(const Vec& a, const Vec& b, int dim) {
  double s = a[0] * b[0];
  if (dim > 1) s += a[1] * b[1];
  return s;
}

inline Vec add(const Vec& a, const Vec& b) { return {a[0] + b[0], a[1] + b[1]}; }
inline Vec sub(const Vec& a, const Vec& b) { return {a[0] - b[0], a[1] - b[1]}; }
inline Vec scale(const Vec& a, double c) { return {a[0] * c, a[1] * c}; }

inline double norm(const Vec& a, int dim) { return std::sqrt(dot(a, a, dim)); }

/// Symmetric matrix stored as (xx, xy, yy); in dimension 1 only xx is used.
struct Sym {
  double xx = 0, xy = 0, yy = 0;

  double det(int dim) const { return dim == 1 ? xx : xx * yy - xy * xy; }

  Sym inverse(int dim) const {
    if (dim == 1) return {1.0 / xx, 0, 0};
    double d = det(2);
    return {yy / d, -xy / d, xx / d};
  }

  Vec apply(const Vec& v, int dim) const {
    if (dim == 1) return {xx * v[0], 0};
    return {xx * v[0] + xy * v[1], xy * v[0] + yy * v[1]};
  }

  /// Solve A x = b (A assumed nonsingular).
  Vec solve(const Vec& b, int dim) const {
    if (dim == 1) return {b[0] / xx, 0};
    double d = det(2);
    return {(yy * b[0] - xy * b[1]) / d, (xx * b[1] - xy * b[0]) / d};
  }

  /// Smallest eigenvalue (for convexity diagnostics).
  double min_eigenvalue(int dim) const {
    if (dim == 1) return xx;
    double tr = xx + yy;
    double disc = std::sqrt(std::max(0.0, (xx - yy) * (xx - yy) + 4 * xy * xy));
    return 0.5 * (tr - disc);
  }

  Sym plus(const Sym& o) const { return {xx + o.xx, xy + o.xy, yy + o.yy}; }
  Sym times(double c) const { return {xx * c, xy * c, yy * c}; }
};

using GridFn = std::vector<double>;

// ---------------------------------------------------------------------------
// Error taxonomy.  CLI maps these onto exit codes: usage errors -> 2,
// numerical degeneracies -> 3.

struct Error : std::runtime_error {
  explicit Error(const std::string& m) : std::runtime_error(m) {}
};

struct CatalogError : Error {
  explicit CatalogError(const std::string& m) : Error(m) {}
};

struct DomainError : Error {
  explicit DomainError(const std::string& m) : Error(m) {}
};

struct ConvexityError : Error {
  explicit ConvexityError(const std::string& m) : Error(m) {}
};

struct DegeneracyError : Error {
  explicit DegeneracyError(const std::string& m) : Error(m) {}
};

struct ParameterError : Error {
  explicit ParameterError(const std::string& m) : Error(m) {}
};

struct IoError : Error {
  explicit IoError(const std::string& m) : Error(m) {}
};

struct DiagnosticError : Error {
  explicit DiagnosticError(const std::string& m) : Error(m) {}
};

struct ConstructionError : Error {
  explicit ConstructionError(const std::string& m) : Error(m) {}
};

}  // namespace tkrl
