/// Energy functionals of toric Kahler potentials: Aubin-Mabuchi, Ding,
/// entropy, the Ricci-weighted L term, K-energy, I_p, G_alpha, the Ricci
/// potential of omega_u and the H-functional / epsilon-integrand pair.
#pragma once

#include <string>
#include <vector>

#include "tkrl/potential.hpp"

namespace tkrl {

/// Finsler norm ||xi||_{p,u} = ((1/Vol) int |xi|^p omega_u^n)^{1/p} for xi
/// given at the pullback nodes of u.  p >= 1.
double finsler_norm(const GridFn& xi, const PotentialField& u, double p);

/// Aubin-Mabuchi energy.  Along the symplectic-side line s_t = g + t v the
/// derivative of AM is -(1/Vol) int_P (d/dt v) dx, so the line integral from
/// 0 collapses to the exact closed form AM(u) = -(1/vol P) int_P v dx.
double am(const PotentialField& u);

/// u - AM(u): shifts the potential so that AM vanishes (exactly, since the
/// same weighted mean is subtracted that am() evaluates).
PotentialField am_normalize(const PotentialField& u);

/// Ding functional F(u) = -AM(u) - log int e^{-u+f_omega} omega^n.  The
/// measure integral is evaluated on the dual grid (e^{f_omega} omega^n has
/// density e^{-phi_ref+c0} dy there) with log-sum-exp stabilization.
double ding_f(const PotentialField& u);

/// Relative entropy H(omega_u^n | omega^n) = int log(omega_u^n/omega^n)
/// omega_u^n >= 0.
double entropy(const PotentialField& u);

/// L(u) = sum_{j=0}^{n-1} int_X u Ric omega ^ omega_u^j ^ omega^{n-1-j}
/// (no 1/Vol).  Mixed wedges reduce to mixed-discriminant densities in dual
/// coordinates; the Ricci matrix comes from ReferenceGeometry::ricci_at.
double l_func(const PotentialField& u);

/// Mabuchi K-energy M(u) = n AM(u) - L(u) + H(omega_u^n | omega^n).
double k_energy(const PotentialField& u);

/// I_p(u0,u1) = (int |u0-u1|^p omega_{u0}^n)^{1/p}
///            + (int |u0-u1|^p omega_{u1}^n)^{1/p}, p >= 1 (no 1/Vol).
double i_p(const PotentialField& u0, const PotentialField& u1, double p);

/// G_alpha(u) = -log int e^{-alpha(u - sup u) + f_omega} omega^n, 0<alpha<1.
double g_alpha(const PotentialField& u, double alpha);

/// Ricci potential of omega_u at the pullback nodes of u, from the identity
/// e^{f_{omega_u}} omega_u^n = e^{-u+f_omega} omega^n / int e^{-u+f_omega}
/// omega^n.  With this normalization int e^{f_{omega_u}} omega_u^n = 1.
GridFn f_omega_u(const PotentialField& u);

struct HEps {
  double h_functional;   // int f e^f omega_u^n + log Vol  (KL form, >= 0)
  double eps_integrand;  // int f (e^f - 1/Vol) omega_u^n  (symmetric KL, >= 0)
};

/// H-functional and epsilon-integrand of f = f_{omega_u}, computed as the
/// discrete KL divergences of the node measures p_k ~ w_k e^{f_k} and
/// m_k ~ w_k, which makes the nonnegativity of both structural.
HEps h_and_eps(const PotentialField& u);

/// Per-potential record of every functional; M is recomputed from its
/// definition n*AM - L + H, never copied.
struct FunctionalLedger {
  double am = 0, f = 0, m = 0, h = 0, l = 0, sup = 0, inf = 0;
  std::vector<double> ps;        // exponents of the I_p(u, 0) table
  std::vector<double> i_p_from0; // I_p(u, 0) per exponent
  std::vector<double> alphas;    // G_alpha table
  std::vector<double> g_alphas;
  double h_functional = 0, eps_integrand = 0;
};

FunctionalLedger evaluate_ledger(const PotentialField& u,
                                 const std::vector<double>& ps = {1, 2},
                                 const std::vector<double>& alphas = {0.5,
                                                                      0.7});

/// CSV serialization, one row per ledger; the first lines carry a versioned
/// schema comment and the column header.
std::string ledger_csv_header(const FunctionalLedger& shape);
std::string ledger_csv_row(const FunctionalLedger& led, double tag);
void write_ledger_csv(const std::string& path,
                      const std::vector<double>& tags,
                      const std::vector<FunctionalLedger>& rows);

}  // namespace tkrl
