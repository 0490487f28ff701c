#include "tkrl/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <sstream>

namespace tkrl {

double DelzantPolytope::min_l(const Vec& x) const {
  double m = facets[0].eval(x, dim);
  for (size_t i = 1; i < facets.size(); ++i) m = std::min(m, facets[i].eval(x, dim));
  return m;
}

double DelzantPolytope::volume() const {
  if (dim == 1) {
    long lo = vertices[0][0], hi = vertices[1][0];
    return double(std::labs(hi - lo));
  }
  // shoelace over integer vertices, exact in long arithmetic
  long twice = 0;
  size_t n = vertices.size();
  for (size_t i = 0; i < n; ++i) {
    const auto& a = vertices[i];
    const auto& b = vertices[(i + 1) % n];
    twice += a[0] * b[1] - b[0] * a[1];
  }
  return std::labs(twice) / 2.0;
}

double DelzantPolytope::manifold_volume() const {
  double f = 1.0;
  for (int k = 2; k <= dim; ++k) f *= k;
  return f * volume();
}

Vec DelzantPolytope::barycenter() const {
  if (dim == 1) {
    return vec1((vertices[0][0] + vertices[1][0]) / 2.0);
  }
  // centroid of a polygon; integer cross products keep it exact up to the
  // final divisions
  long twice = 0;
  long mx = 0, my = 0;
  size_t n = vertices.size();
  for (size_t i = 0; i < n; ++i) {
    const auto& a = vertices[i];
    const auto& b = vertices[(i + 1) % n];
    long cr = a[0] * b[1] - b[0] * a[1];
    twice += cr;
    mx += (a[0] + b[0]) * cr;
    my += (a[1] + b[1]) * cr;
  }
  double denom = 3.0 * twice;
  return vec2(mx / denom, my / denom);
}

double DelzantPolytope::guillemin(const Vec& x) const {
  double s = 0;
  for (const auto& f : facets) {
    double li = f.eval(x, dim);
    if (li <= 0) throw DomainError("guillemin: node outside polytope (l_i <= 0) in " + name);
    s += li * std::log(li);
  }
  return 0.5 * s;
}

Vec DelzantPolytope::guillemin_grad(const Vec& x) const {
  Vec g{0, 0};
  for (const auto& f : facets) {
    double li = f.eval(x, dim);
    if (li <= 0) throw DomainError("guillemin_grad: node outside polytope in " + name);
    double c = 0.5 * (std::log(li) + 1.0);
    g[0] += c * f.normal[0];
    if (dim > 1) g[1] += c * f.normal[1];
  }
  return g;
}

Sym DelzantPolytope::guillemin_hess(const Vec& x) const {
  Sym h;
  for (const auto& f : facets) {
    double li = f.eval(x, dim);
    if (li <= 0) throw DomainError("guillemin_hess: node outside polytope in " + name);
    double c = 0.5 / li;
    h.xx += c * f.normal[0] * f.normal[0];
    if (dim > 1) {
      h.xy += c * f.normal[0] * f.normal[1];
      h.yy += c * f.normal[1] * f.normal[1];
    }
  }
  return h;
}

double DelzantPolytope::guillemin_logdet_hess(const Vec& x) const {
  Sym h = guillemin_hess(x);
  double d = h.det(dim);
  if (d <= 0) throw DegeneracyError("guillemin Hessian not positive definite in " + name);
  return std::log(d);
}

void DelzantPolytope::validate() const {
  if (dim != 1 && dim != 2) throw CatalogError(name + ": dim must be 1 or 2");
  if (facets.empty() || vertices.empty()) throw CatalogError(name + ": empty data");

  // origin interior: l_i(0) = 1 by construction, nothing to check beyond form
  Vec origin{0, 0};
  for (const auto& f : facets)
    if (f.eval(origin, dim) != 1.0) throw CatalogError(name + ": facet offset not 1");

  // every vertex lies on exactly `dim` facets, is inside all others, and the
  // active normals are unimodular (Delzant condition)
  for (const auto& v : vertices) {
    Vec x = dim == 1 ? vec1(double(v[0])) : vec2(double(v[0]), double(v[1]));
    std::vector<int> active;
    for (size_t i = 0; i < facets.size(); ++i) {
      double li = facets[i].eval(x, dim);
      if (li < 0) throw CatalogError(name + ": vertex outside a facet halfspace");
      if (li == 0) active.push_back(int(i));
    }
    if (int(active.size()) != dim)
      throw CatalogError(name + ": vertex not on exactly dim facets");
    if (dim == 2) {
      const auto& a = facets[active[0]].normal;
      const auto& b = facets[active[1]].normal;
      long det = a[0] * b[1] - a[1] * b[0];
      if (det != 1 && det != -1)
        throw CatalogError(name + ": vertex normals not unimodular");
    } else {
      long a = facets[active[0]].normal[0];
      if (a != 1 && a != -1) throw CatalogError(name + ": facet normal not unimodular");
    }
  }

  // each facet supports exactly `dim` vertices (boundedness / consistency)
  for (size_t i = 0; i < facets.size(); ++i) {
    int count = 0;
    for (const auto& v : vertices) {
      Vec x = dim == 1 ? vec1(double(v[0])) : vec2(double(v[0]), double(v[1]));
      if (facets[i].eval(x, dim) == 0) ++count;
    }
    if (count != dim) throw CatalogError(name + ": facet supports wrong vertex count");
  }

  if (volume() <= 0) throw CatalogError(name + ": nonpositive volume");
}

std::string DelzantPolytope::to_json() const {
  std::ostringstream os;
  os << "{\"name\":\"" << name << "\",\"dim\":" << dim << ",\"facets\":[";
  for (size_t i = 0; i < facets.size(); ++i) {
    if (i) os << ",";
    os << "{\"normal\":[" << facets[i].normal[0];
    if (dim > 1) os << "," << facets[i].normal[1];
    os << "],\"offset\":1}";
  }
  os << "],\"vertices\":[";
  for (size_t i = 0; i < vertices.size(); ++i) {
    if (i) os << ",";
    os << "[" << vertices[i][0];
    if (dim > 1) os << "," << vertices[i][1];
    os << "]";
  }
  os << "]}";
  return os.str();
}

namespace {

DelzantPolytope make(const std::string& name, int dim,
                     std::vector<std::array<long, 2>> normals,
                     std::vector<std::array<long, 2>> verts) {
  DelzantPolytope p;
  p.name = name;
  p.dim = dim;
  for (auto& n : normals) p.facets.push_back(Facet{n});
  p.vertices = std::move(verts);
  p.validate();
  return p;
}

// Frozen catalog.  The 2D entries are the reflexive polygons of the smooth
// toric del Pezzo surfaces in Fano normalization; Bl1P2 and Bl2P2 have
// nonzero barycenter (no Kahler-Einstein metric).
const std::map<std::string, DelzantPolytope>& catalog() {
  static const std::map<std::string, DelzantPolytope> c = [] {
    std::map<std::string, DelzantPolytope> m;
    m.emplace("P1", make("P1", 1, {{1, 0}, {-1, 0}}, {{-1, 0}, {1, 0}}));
    m.emplace("P2", make("P2", 2, {{1, 0}, {0, 1}, {-1, -1}},
                         {{-1, -1}, {2, -1}, {-1, 2}}));
    m.emplace("P1xP1", make("P1xP1", 2, {{1, 0}, {-1, 0}, {0, 1}, {0, -1}},
                            {{-1, -1}, {1, -1}, {1, 1}, {-1, 1}}));
    m.emplace("Bl1P2", make("Bl1P2", 2, {{1, 0}, {0, 1}, {-1, -1}, {0, -1}},
                            {{-1, -1}, {2, -1}, {0, 1}, {-1, 1}}));
    m.emplace("Bl2P2", make("Bl2P2", 2,
                            {{1, 0}, {0, 1}, {-1, -1}, {0, -1}, {-1, 0}},
                            {{-1, -1}, {1, -1}, {1, 0}, {0, 1}, {-1, 1}}));
    m.emplace("Bl3P2", make("Bl3P2", 2,
                            {{1, 0}, {0, 1}, {-1, -1}, {-1, 0}, {0, -1}, {1, 1}},
                            {{1, 0}, {0, 1}, {-1, 1}, {-1, 0}, {0, -1}, {1, -1}}));
    return m;
  }();
  return c;
}

}  // namespace

const DelzantPolytope& catalog_lookup(const std::string& name) {
  const auto& c = catalog();
  auto it = c.find(name);
  if (it == c.end()) {
    std::string valid;
    for (const auto& n : catalog_names()) valid += (valid.empty() ? "" : ", ") + n;
    throw CatalogError("unknown manifold '" + name + "'; valid names: " + valid);
  }
  return it->second;
}

std::vector<std::string> catalog_names() {
  std::vector<std::string> names;
  for (const auto& [k, v] : catalog()) names.push_back(k);
  return names;
}

}  // namespace tkrl
