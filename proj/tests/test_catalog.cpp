/// Catalog invariants: exact volumes/barycenters, Delzant validation, and a
/// Monte Carlo cross-check of the closed-form polytope data.
#include <cmath>
#include <random>

#include "doctest.h"
#include "test_support.hpp"
#include "tkrl/polytope.hpp"

using namespace tkrl;

TEST_CASE("catalog frozen values") {
  const auto& p1 = catalog_lookup("P1");
  CHECK(p1.dim == 1);
  CHECK(p1.volume() == 2.0);
  CHECK(p1.manifold_volume() == 2.0);
  CHECK(p1.barycenter()[0] == 0.0);

  const auto& p2 = catalog_lookup("P2");
  CHECK(p2.volume() == doctest::Approx(4.5).epsilon(1e-14));
  CHECK(p2.manifold_volume() == doctest::Approx(9.0).epsilon(1e-14));
  CHECK(p2.barycenter()[0] == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(p2.barycenter()[1] == doctest::Approx(0.0).epsilon(1e-14));

  const auto& pp = catalog_lookup("P1xP1");
  CHECK(pp.volume() == 4.0);
  CHECK(pp.manifold_volume() == 8.0);
  CHECK(pp.barycenter()[0] == 0.0);

  const auto& b1 = catalog_lookup("Bl1P2");
  CHECK(b1.volume() == 4.0);
  CHECK(b1.barycenter()[0] == doctest::Approx(1.0 / 12).epsilon(1e-14));
  CHECK(b1.barycenter()[1] == doctest::Approx(-1.0 / 6).epsilon(1e-14));

  const auto& b2 = catalog_lookup("Bl2P2");
  CHECK(b2.volume() == 3.5);
  CHECK(b2.barycenter()[0] == doctest::Approx(-2.0 / 21).epsilon(1e-14));
  CHECK(b2.barycenter()[1] == doctest::Approx(-2.0 / 21).epsilon(1e-14));

  const auto& b3 = catalog_lookup("Bl3P2");
  CHECK(b3.volume() == 3.0);
  CHECK(b3.barycenter()[0] == 0.0);
  CHECK(b3.barycenter()[1] == 0.0);
}

TEST_CASE("catalog validates and rejects unknown names") {
  for (const auto& name : catalog_names())
    CHECK_NOTHROW(catalog_lookup(name).validate());
  CHECK(catalog_names().size() == 6);
  CHECK_THROWS_AS(catalog_lookup("P3"), CatalogError);
  try {
    catalog_lookup("nope");
  } catch (const CatalogError& e) {
    // the message must list the valid names
    CHECK(std::string(e.what()).find("P1xP1") != std::string::npos);
  }
}

// Monte Carlo oracle for volume and barycenter: rejection sampling in the
// bounding box with a fixed seed.
static void mc_check(const DelzantPolytope& p) {
  std::mt19937_64 rng(12345);
  double lo0 = 1e9, hi0 = -1e9, lo1 = 1e9, hi1 = -1e9;
  for (const auto& v : p.vertices) {
    lo0 = std::min(lo0, double(v[0]));
    hi0 = std::max(hi0, double(v[0]));
    if (p.dim == 2) {
      lo1 = std::min(lo1, double(v[1]));
      hi1 = std::max(hi1, double(v[1]));
    }
  }
  std::uniform_real_distribution<double> u0(lo0, hi0), u1(lo1, hi1);
  const int N = 1000000;
  long hits = 0;
  double sx = 0, sy = 0;
  for (int i = 0; i < N; ++i) {
    Vec x = p.dim == 1 ? vec1(u0(rng)) : vec2(u0(rng), u1(rng));
    if (p.min_l(x) >= 0) {
      ++hits;
      sx += x[0];
      sy += x[1];
    }
  }
  double box = p.dim == 1 ? (hi0 - lo0) : (hi0 - lo0) * (hi1 - lo1);
  double vol_mc = box * double(hits) / N;
  CHECK(vol_mc == doctest::Approx(p.volume()).epsilon(5e-3));
  Vec b = p.barycenter();
  CHECK_NEAR(sx / double(hits), b[0], 5e-3);
  if (p.dim == 2)
    CHECK_NEAR(sy / double(hits), b[1], 5e-3);
}

TEST_CASE("catalog volume/barycenter agrees with Monte Carlo") {
  mc_check(catalog_lookup("P2"));
  mc_check(catalog_lookup("Bl1P2"));
  mc_check(catalog_lookup("Bl2P2"));
  mc_check(catalog_lookup("Bl3P2"));
}

TEST_CASE("guillemin potential derivatives and convexity") {
  const auto& p = catalog_lookup("Bl1P2");
  Vec pts[] = {vec2(0.1, -0.2), vec2(-0.5, 0.3), vec2(1.2, -0.7), vec2(0.0, 0.0)};
  double h = 1e-5;
  for (const auto& x : pts) {
    Vec g = p.guillemin_grad(x);
    Sym H = p.guillemin_hess(x);
    CHECK(H.min_eigenvalue(2) > 0);
    // finite-difference cross-check
    double gx = (p.guillemin(vec2(x[0] + h, x[1])) - p.guillemin(vec2(x[0] - h, x[1]))) / (2 * h);
    double gy = (p.guillemin(vec2(x[0], x[1] + h)) - p.guillemin(vec2(x[0], x[1] - h))) / (2 * h);
    CHECK_NEAR(gx, g[0], 1e-8);
    CHECK_NEAR(gy, g[1], 1e-8);
    double hxx = (p.guillemin(vec2(x[0] + h, x[1])) - 2 * p.guillemin(x) +
                  p.guillemin(vec2(x[0] - h, x[1]))) / (h * h);
    CHECK_NEAR(hxx, H.xx, 1e-5);
  }
  CHECK_THROWS_AS(p.guillemin(vec2(5.0, 5.0)), DomainError);
}

TEST_CASE("guillemin 1d closed form") {
  const auto& p = catalog_lookup("P1");
  // g(x) = 1/2 [(1+x)log(1+x) + (1-x)log(1-x)]
  for (double x : {-0.9, -0.3, 0.0, 0.4, 0.99}) {
    double want = 0.5 * ((1 + x) * std::log(1 + x) + (1 - x) * std::log(1 - x));
    CHECK(p.guillemin(vec1(x)) == doctest::Approx(want).epsilon(1e-14));
    // grad = atanh(x), hess = 1/(1-x^2)
    CHECK_NEAR(p.guillemin_grad(vec1(x))[0], std::atanh(x), 1e-13);
    CHECK(p.guillemin_hess(vec1(x)).xx == doctest::Approx(1.0 / (1 - x * x)).epsilon(1e-12));
  }
}

TEST_CASE("to_json round structure") {
  auto j = catalog_lookup("P1xP1").to_json();
  CHECK(j.find("\"name\":\"P1xP1\"") != std::string::npos);
  CHECK(j.find("\"offset\":1") != std::string::npos);
}
