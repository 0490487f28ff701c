/// Delzant polytopes of the toric Fano catalog.
///
/// Facets are stored in the Fano normalization l_i(x) = <a_i, x> + 1 with
/// integer normals a_i; all catalog vertices are integral (reflexivity).
#pragma once

#include <string>
#include <vector>

#include "tkrl/core.hpp"

namespace tkrl {

struct Facet {
  std::array<long, 2> normal{0, 0};
  // offset fixed to 1 by the Fano normalization

  double eval(const Vec& x, int dim) const {
    double s = normal[0] * x[0] + 1.0;
    if (dim > 1) s += normal[1] * x[1];
    return s;
  }
};

struct DelzantPolytope {
  std::string name;
  int dim = 0;
  std::vector<Facet> facets;
  std::vector<std::array<long, 2>> vertices;  // integral, in boundary order for dim 2

  double l(int i, const Vec& x) const { return facets[i].eval(x, dim); }

  /// min_i l_i(x); positive iff x is interior.
  double min_l(const Vec& x) const;

  /// Euclidean volume of the polytope (exact: shoelace on integer vertices).
  double volume() const;

  /// Vol(X) = n! * vol(P) -- the volume convention used by every functional.
  double manifold_volume() const;

  /// Exact centroid (the Futaki probe: nonzero centroid <=> nonzero Futaki
  /// invariant on the catalog).
  Vec barycenter() const;

  /// Guillemin symplectic potential g_P(x) = 1/2 sum_i l_i log l_i.
  double guillemin(const Vec& x) const;
  Vec guillemin_grad(const Vec& x) const;
  Sym guillemin_hess(const Vec& x) const;
  /// log det D^2 g_P(x)
  double guillemin_logdet_hess(const Vec& x) const;

  /// Throws CatalogError if the Delzant/reflexivity invariants fail.
  void validate() const;

  std::string to_json() const;
};

/// Names: P1, P2, P1xP1, Bl1P2, Bl2P2, Bl3P2.
const DelzantPolytope& catalog_lookup(const std::string& name);
std::vector<std::string> catalog_names();

}  // namespace tkrl
