/// Grid construction, finite-difference stencils, and the max-plus engine.
#include <cmath>
#include <random>

#include "doctest.h"
#include "test_support.hpp"
#include "tkrl/grid.hpp"
#include "tkrl/legendre.hpp"
#include "tkrl/polytope.hpp"

using namespace tkrl;

TEST_CASE("moment grid covers the polytope interior") {
  const auto& p1 = catalog_lookup("P1");
  auto g = make_moment_grid(p1, 2.0 / 512, 1e-7);
  CHECK(g.dim == 1);
  CHECK(g.size() > 500);
  CHECK(std::abs(g.total_weight() - 2.0) < 2 * g.h);
  for (size_t k = 0; k < g.size(); ++k)
    CHECK(p1.min_l(g.node(k)) >= g.delta);

  const auto& b1 = catalog_lookup("Bl1P2");
  auto g2 = make_moment_grid(b1, 3.0 / 64, 1e-7);
  CHECK(g2.dim == 2);
  double perim_scale = 10 * g2.h;
  CHECK(std::abs(g2.total_weight() - 4.0) < perim_scale);
  for (size_t k = 0; k < g2.size(); ++k) {
    Vec x = g2.node(k);
    CHECK(b1.min_l(x) >= g2.delta);
  }
  // index/node round trip
  for (size_t k = 0; k < g2.size(); k += 37) {
    Vec x = g2.node(k);
    int i = int(std::lround((x[0] - g2.origin_x) / g2.h));
    int j = int(std::lround((x[1] - g2.origin_y) / g2.h));
    CHECK(g2.index(i, j) == k);
  }
}

TEST_CASE("moment finite differences exact on quadratics") {
  const auto& b1 = catalog_lookup("P2");
  auto g = make_moment_grid(b1, 3.0 / 48, 1e-7);
  GridFn f(g.size());
  for (size_t k = 0; k < g.size(); ++k) {
    Vec x = g.node(k);
    f[k] = 0.7 * x[0] * x[0] + 0.4 * x[0] * x[1] - 0.3 * x[1] * x[1] + 2 * x[0] - x[1] + 5;
  }
  for (size_t k = 0; k < g.size(); k += 11) {
    Vec x = g.node(k);
    Vec gr = moment_grad(g, f, k);
    CHECK_NEAR(gr[0], 1.4 * x[0] + 0.4 * x[1] + 2, 1e-8);
    CHECK_NEAR(gr[1], 0.4 * x[0] - 0.6 * x[1] - 1, 1e-8);
    Sym H = moment_hess(g, f, k);
    CHECK_NEAR(H.xx, 1.4, 1e-7);
    CHECK_NEAR(H.xy, 0.4, 1e-7);
    CHECK_NEAR(H.yy, -0.6, 1e-7);
  }
}

TEST_CASE("legendre_1d matches the quadratic closed form") {
  int n = 801;
  double y0 = -4, hy = 8.0 / (n - 1);
  std::vector<double> f(static_cast<size_t>(n));
  for (int j = 0; j < n; ++j) {
    double y = y0 + j * hy;
    f[size_t(j)] = 0.5 * y * y;
  }
  std::vector<double> xs = {-3.0, -1.2, -0.013, 0.0, 0.7, 2.9};
  std::vector<double> out(xs.size());
  legendre_1d(y0, hy, f.data(), n, xs.data(), int(xs.size()), out.data(), nullptr, true);
  for (size_t q = 0; q < xs.size(); ++q)
    CHECK_NEAR(out[q], 0.5 * xs[q] * xs[q], 1e-12);
  // unrefined error is O(h^2)
  legendre_1d(y0, hy, f.data(), n, xs.data(), int(xs.size()), out.data(), nullptr, false);
  for (size_t q = 0; q < xs.size(); ++q) {
    CHECK(out[q] <= 0.5 * xs[q] * xs[q] + 1e-14);
    CHECK(out[q] >= 0.5 * xs[q] * xs[q] - hy * hy);
  }
}

TEST_CASE("legendre_1d exact structural identities (unrefined)") {
  std::mt19937_64 rng(7);
  int n = 257;
  double y0 = -3, hy = 6.0 / (n - 1);
  std::vector<double> f(static_cast<size_t>(n)), g(static_cast<size_t>(n));
  std::uniform_real_distribution<double> u(0, 0.1);
  for (int j = 0; j < n; ++j) {
    double y = y0 + j * hy;
    f[size_t(j)] = std::cosh(y) + u(rng);
    g[size_t(j)] = f[size_t(j)] + u(rng);  // g >= f
  }
  int m = 101;
  std::vector<double> xs(static_cast<size_t>(m));
  for (int q = 0; q < m; ++q) xs[size_t(q)] = -2.0 + 4.0 * q / (m - 1);
  std::vector<double> Ff(static_cast<size_t>(m)), Fg(static_cast<size_t>(m)), Fs(static_cast<size_t>(m));
  legendre_1d(y0, hy, f.data(), n, xs.data(), m, Ff.data(), nullptr, false);
  legendre_1d(y0, hy, g.data(), n, xs.data(), m, Fg.data(), nullptr, false);
  // order reversal (up to roundoff in the hull bookkeeping)
  for (int q = 0; q < m; ++q) CHECK(Fg[size_t(q)] <= Ff[size_t(q)] + 1e-12);
  // shift equivariance to machine precision
  std::vector<double> fc(static_cast<size_t>(n));
  for (int j = 0; j < n; ++j) fc[size_t(j)] = f[size_t(j)] + 1.75;
  legendre_1d(y0, hy, fc.data(), n, xs.data(), m, Fs.data(), nullptr, false);
  for (int q = 0; q < m; ++q) CHECK_NEAR(Fs[size_t(q)], Ff[size_t(q)] - 1.75, 1e-12);
}

TEST_CASE("double transform is an involution on convex data") {
  int n = 513;
  double y0 = -3, hy = 6.0 / (n - 1);
  std::vector<double> f(static_cast<size_t>(n)), ys(static_cast<size_t>(n));
  for (int j = 0; j < n; ++j) {
    double y = y0 + j * hy;
    ys[size_t(j)] = y;
    f[size_t(j)] = std::log(std::cosh(y)) + 0.3 * y;
  }
  // conjugate onto a wide slope grid, then back
  int m = 2049;
  double x0 = -1.4, hx = 2.8 / (m - 1);
  std::vector<double> xs(static_cast<size_t>(m)), F(static_cast<size_t>(m)), back(static_cast<size_t>(n));
  for (int q = 0; q < m; ++q) xs[size_t(q)] = x0 + q * hx;
  legendre_1d(y0, hy, f.data(), n, xs.data(), m, F.data(), nullptr, true);
  legendre_1d(x0, hx, F.data(), m, ys.data(), n, back.data(), nullptr, true);
  for (int j = 10; j < n - 10; ++j)
    CHECK_NEAR(back[size_t(j)], f[size_t(j)], 1e-5);
}

TEST_CASE("envelope_1d equals the brute-force lower hull") {
  std::mt19937_64 rng(99);
  int n = 181;
  double y0 = -2, hy = 4.0 / (n - 1);
  std::vector<double> f(static_cast<size_t>(n));
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (int j = 0; j < n; ++j) {
    double y = y0 + j * hy;
    f[size_t(j)] = 0.3 * y * y + std::sin(3 * y) * 0.4 + u(rng);
  }
  auto env = envelope_1d(y0, hy, f);
  // oracle: min over all chords through j
  for (int j = 0; j < n; ++j) {
    double best = f[size_t(j)];
    for (int a = 0; a <= j; ++a)
      for (int b = j; b < n; ++b) {
        if (a == b) continue;
        double t = double(j - a) / double(b - a);
        best = std::min(best, (1 - t) * f[size_t(a)] + t * f[size_t(b)]);
      }
    CHECK_NEAR(env[size_t(j)], best, 1e-10);
  }
  CHECK(convexity_gap_1d(y0, hy, f) > 0.01);
  // convex data has zero gap
  std::vector<double> c(static_cast<size_t>(n));
  for (int j = 0; j < n; ++j) {
    double y = y0 + j * hy;
    c[size_t(j)] = std::exp(0.8 * y);
  }
  CHECK(convexity_gap_1d(y0, hy, c) <= 1e-12);
}

TEST_CASE("envelope_2d lies below the data and fixes convex data") {
  int nx = 41, ny = 41;
  double x0 = -1, hx = 2.0 / (nx - 1), y0 = -1, hy = 2.0 / (ny - 1);
  std::vector<double> f(size_t(nx) * ny), q(size_t(nx) * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      double x = x0 + i * hx, y = y0 + j * hy;
      q[size_t(j) * nx + i] = x * x + 0.5 * x * y + y * y;
      f[size_t(j) * nx + i] = q[size_t(j) * nx + i] + 0.3 * std::sin(5 * x) * std::sin(5 * y);
    }
  auto envf = envelope_2d(nx, ny, x0, hx, y0, hy, f);
  auto envq = envelope_2d(nx, ny, x0, hx, y0, hy, q);
  for (size_t k = 0; k < f.size(); ++k) {
    CHECK(envf[k] <= f[k] + 1e-9);
    CHECK(envq[k] <= q[k] + 1e-9);
    CHECK(envq[k] >= q[k] - 2e-2);
  }
}

TEST_CASE("moment/dual transforms reproduce separable quadratics") {
  const auto& pp = catalog_lookup("P1xP1");
  auto mg = make_moment_grid(pp, 2.0 / 96, 1e-7);
  auto dg = make_dual_grid(2, 6.0, 193);
  GridFn s(mg.size());
  for (size_t k = 0; k < mg.size(); ++k) {
    Vec x = mg.node(k);
    s[k] = 0.5 * (x[0] * x[0] + x[1] * x[1]);
  }
  auto phi = dual_from_moment(mg, s, dg, true);
  auto conj1 = [&](double t) {
    // conjugate of t^2/2 restricted to [-1+h, 1-h]
    double a = 1.0 - mg.h;
    if (std::abs(t) <= a) return 0.5 * t * t;
    return a * std::abs(t) - 0.5 * a * a;
  };
  for (size_t k = 0; k < dg.size(); ++k) {
    Vec y = dg.node(k);
    double want = conj1(y[0]) + conj1(y[1]);
    CHECK_NEAR(phi[k], want, 5e-5);
  }
  // and back: the round trip restores s away from the boundary
  auto s2 = moment_from_dual(dg, phi, mg, true);
  for (size_t k = 0; k < mg.size(); ++k) {
    Vec x = mg.node(k);
    if (std::abs(x[0]) < 0.8 && std::abs(x[1]) < 0.8)
      CHECK_NEAR(s2[k], s[k], 5e-5);
  }
}

TEST_CASE("conjugate evaluator agrees with closed form") {
  const auto& pp = catalog_lookup("P1xP1");
  auto mg = make_moment_grid(pp, 2.0 / 128, 1e-7);
  GridFn s(mg.size());
  for (size_t k = 0; k < mg.size(); ++k) {
    Vec x = mg.node(k);
    s[k] = x[0] * x[0] + 0.25 * x[0] * x[1] + 0.75 * x[1] * x[1];
  }
  ConjugateEvaluator ce(mg, s);
  // conjugate of x^T A x with A = [[2, .25],[.25, 1.5]]/... : s = 1/2 x^T M x,
  // M = [[2, .25],[.25, 1.5]]; conjugate = 1/2 y^T M^{-1} y where unconstrained
  Sym M{2.0, 0.25, 1.5};
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-0.8, 0.8);
  for (int t = 0; t < 50; ++t) {
    Vec y = vec2(u(rng), u(rng));
    Vec xstar = M.solve(y, 2);
    if (pp.min_l(xstar) < 0.1) continue;  // stay away from the constraint
    double want = 0.5 * dot(y, xstar, 2);
    Vec arg;
    double got = ce.eval(y, &arg);
    CHECK_NEAR(got, want, 1e-9);
    CHECK(norm(sub(arg, xstar), 2) < 1e-4);
  }
}
