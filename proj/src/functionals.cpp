#include "tkrl/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace tkrl {

namespace {

double lse(const GridFn& t) {
  double m = *std::max_element(t.begin(), t.end());
  if (!std::isfinite(m)) return m;
  double s = 0;
  for (double v : t) s += std::exp(v - m);
  return m + std::log(s);
}

/// Mixed discriminant of 2x2 symmetric matrices: md(A,A) = det A.
double md(const Sym& a, const Sym& b) {
  return 0.5 * (a.xx * b.yy + a.yy * b.xx - 2.0 * a.xy * b.xy);
}

/// log int e^{-u+f_omega} omega^n on the dual grid, where the measure
/// e^{f_omega} omega^n has density e^{-phi_ref(y)+c0} dy.
double log_ding_integral(const PotentialField& u) {
  const ReferenceGeometry& ref = u.ref();
  const GridFn& ud = u.u();
  const GridFn& pr = ref.phi_ref_dual();
  GridFn t(ud.size());
  for (size_t k = 0; k < t.size(); ++k) t[k] = -ud[k] - pr[k];
  double log_wd = ref.dim() * std::log(ref.dgrid().h);
  return ref.c0() + log_wd + lse(t);
}

}  // namespace

double finsler_norm(const GridFn& xi, const PotentialField& u, double p) {
  if (p < 1) throw ParameterError("finsler_norm: p must be >= 1");
  const ReferenceGeometry& ref = u.ref();
  if (xi.size() != ref.mgrid().size())
    throw ParameterError("finsler_norm: xi size mismatch");
  GridFn t(xi.size());
  for (size_t k = 0; k < t.size(); ++k) t[k] = std::pow(std::abs(xi[k]), p);
  return std::pow(ref.weighted_mean(t), 1.0 / p);
}

double am(const PotentialField& u) {
  // d/dt AM(tu) = (1/Vol) int_X u omega_{tu}^n pushed forward to P is
  // -(1/vol P) int_P v dx independently of t, so the Gauss-in-t line
  // integral collapses to this closed form.
  return -u.ref().weighted_mean(u.v());
}

PotentialField am_normalize(const PotentialField& u) {
  double c = am(u);
  GridFn v = u.v();
  for (double& x : v) x += c;  // u -> u - c is v -> v + c
  return PotentialField::from_v(u.ref(), std::move(v));
}

double ding_f(const PotentialField& u) {
  return -am(u) - log_ding_integral(u);
}

double entropy(const PotentialField& u) {
  const auto& pb = u.pullback();
  size_t n = pb.det_s.size();
  GridFn lr(n);
  for (size_t k = 0; k < n; ++k)
    lr[k] = -pb.logdet_ref[k] - std::log(pb.det_s[k]);
  return u.ref().VolX() * u.ref().weighted_mean(lr);
}

double l_func(const PotentialField& u) {
  const ReferenceGeometry& ref = u.ref();
  const auto& pb = u.pullback();
  size_t n = pb.det_s.size();
  int dim = ref.dim();
  GridFn t(n);
  if (dim == 1) {
    // L = int u Ric-density dy = int_P u(y(x)) R(y(x)) s''(x) dx
    for (size_t k = 0; k < n; ++k)
      t[k] = pb.u_at_y[k] * ref.ricci_at(pb.y[k]).xx * pb.det_s[k];
  } else {
    // omega_a ^ omega_b has dual density 2 md(D^2 phi_a, D^2 phi_b) dy;
    // the j = 1 slot carries D^2 phi_u(y) = (D^2 s(x))^{-1}.
    for (size_t k = 0; k < n; ++k) {
      Sym R = ref.ricci_at(pb.y[k]);
      double mixed = md(R, pb.hess_s[k].inverse(2)) + md(R, pb.hess_ref_y[k]);
      t[k] = pb.u_at_y[k] * mixed * pb.det_s[k];
    }
  }
  return ref.VolX() * ref.weighted_mean(t);
}

double k_energy(const PotentialField& u) {
  return u.dim() * am(u) - l_func(u) + entropy(u);
}

namespace {

double i_p_oneside(const PotentialField& a, const PotentialField& b,
                   double p) {
  // int |a-b|^p omega_a^n via a's pullback; (a-b)(y_k) needs only b's
  // conjugate value, phi_ref cancels.
  const auto& pb = a.pullback();
  size_t n = pb.u_at_y.size();
  GridFn t(n);
  for (size_t k = 0; k < n; ++k) {
    double diff = pb.u_at_y[k] - (b.phi_at(pb.y[k]) - pb.phi_ref_at_y[k]);
    t[k] = std::pow(std::abs(diff), p);
  }
  return std::pow(a.ref().VolX() * a.ref().weighted_mean(t), 1.0 / p);
}

}  // namespace

double i_p(const PotentialField& u0, const PotentialField& u1, double p) {
  if (p < 1) throw ParameterError("i_p: p must be >= 1");
  if (u0.v() == u1.v()) return 0.0;
  return i_p_oneside(u0, u1, p) + i_p_oneside(u1, u0, p);
}

double g_alpha(const PotentialField& u, double alpha) {
  if (!(alpha > 0 && alpha < 1))
    throw ParameterError("g_alpha: alpha must be in (0,1)");
  const ReferenceGeometry& ref = u.ref();
  const GridFn& ud = u.u();
  const GridFn& pr = ref.phi_ref_dual();
  double sup = u.sup();
  GridFn t(ud.size());
  for (size_t k = 0; k < t.size(); ++k)
    t[k] = -alpha * (ud[k] - sup) - pr[k];
  double log_wd = ref.dim() * std::log(ref.dgrid().h);
  return -(ref.c0() + log_wd + lse(t));
}

GridFn f_omega_u(const PotentialField& u) {
  const auto& pb = u.pullback();
  double logZ = log_ding_integral(u);
  size_t n = pb.u_at_y.size();
  GridFn f(n);
  for (size_t k = 0; k < n; ++k) {
    double log_ratio = -pb.logdet_ref[k] - std::log(pb.det_s[k]);
    f[k] = -pb.u_at_y[k] - logZ + pb.f_omega_at_y[k] - log_ratio;
  }
  return f;
}

HEps h_and_eps(const PotentialField& u) {
  const ReferenceGeometry& ref = u.ref();
  GridFn f = f_omega_u(u);
  const GridFn& w = ref.quad_w();
  size_t n = f.size();
  double volP = 0;
  for (size_t k = 0; k < n; ++k) volP += w[k];
  // p_k ~ w_k e^{f_k} (the omega_u^n e^{f} node measure), m_k ~ w_k
  // (omega_u^n itself); both normalized, so
  //   H   = KL(p || m)            >= 0,
  //   eps = KL(p||m) + KL(m||p)   >= 0
  // hold structurally, node by node.
  GridFn lt(n);
  for (size_t k = 0; k < n; ++k) lt[k] = std::log(w[k]) + f[k];
  double lz = lse(lt);
  HEps r{0, 0};
  for (size_t k = 0; k < n; ++k) {
    double log_ratio = f[k] + std::log(volP) - lz;  // log(p_k/m_k)
    double pk = std::exp(lt[k] - lz);
    double mk = w[k] / volP;
    r.h_functional += pk * log_ratio;
    r.eps_integrand += (pk - mk) * log_ratio;
  }
  return r;
}

FunctionalLedger evaluate_ledger(const PotentialField& u,
                                 const std::vector<double>& ps,
                                 const std::vector<double>& alphas) {
  FunctionalLedger led;
  led.am = am(u);
  led.f = ding_f(u);
  led.h = entropy(u);
  led.l = l_func(u);
  led.m = u.dim() * led.am - led.l + led.h;
  led.sup = u.sup();
  led.inf = u.inf();
  led.ps = ps;
  led.alphas = alphas;
  PotentialField base = PotentialField::zero(u.ref());
  for (double p : ps) led.i_p_from0.push_back(i_p(u, base, p));
  for (double a : alphas) led.g_alphas.push_back(g_alpha(u, a));
  HEps he = h_and_eps(u);
  led.h_functional = he.h_functional;
  led.eps_integrand = he.eps_integrand;
  return led;
}

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

std::string ledger_csv_header(const FunctionalLedger& shape) {
  std::ostringstream os;
  os << "# tkrl-ledger-csv v1\n";
  os << "tag,am,F,M,H,L,sup,inf";
  for (double p : shape.ps) os << ",ip_p" << p;
  for (double a : shape.alphas) os << ",g_a" << a;
  os << ",hfunc,eps\n";
  return os.str();
}

std::string ledger_csv_row(const FunctionalLedger& led, double tag) {
  std::ostringstream os;
  os << fmt(tag) << ',' << fmt(led.am) << ',' << fmt(led.f) << ','
     << fmt(led.m) << ',' << fmt(led.h) << ',' << fmt(led.l) << ','
     << fmt(led.sup) << ',' << fmt(led.inf);
  for (double v : led.i_p_from0) os << ',' << fmt(v);
  for (double v : led.g_alphas) os << ',' << fmt(v);
  os << ',' << fmt(led.h_functional) << ',' << fmt(led.eps_integrand) << '\n';
  return os.str();
}

void write_ledger_csv(const std::string& path,
                      const std::vector<double>& tags,
                      const std::vector<FunctionalLedger>& rows) {
  if (tags.size() != rows.size())
    throw ParameterError("write_ledger_csv: tag/row count mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path);
  if (!rows.empty()) out << ledger_csv_header(rows.front());
  for (size_t i = 0; i < rows.size(); ++i)
    out << ledger_csv_row(rows[i], tags[i]);
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace tkrl
