#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wcs/energy.hpp"
#include "wcs/limit_system.hpp"
#include "wcs/spectral_domain.hpp"

namespace wcs {

/// Radial cut-off: 1 on [0, delta], 0 beyond `support`, quintic smoothstep in between (C^2 at
/// both junctions).
struct CutoffSpec {
  double delta = 0.0;
  double support = 0.0;

  /// delta = inscribed radius / 8, support = 2 delta.
  static CutoffSpec for_domain(const BoxDomain& domain);
  void validate() const;
  double value(double r) const;
  double derivative(double r) const;
};

/// Integrals of u = psi U_eps over R^N (equivalently Omega, since supp psi lies inside Omega).
struct BnIntegrals {
  double eps = 0.0;
  double grad2 = 0.0;        // int |grad u|^2
  double pow_crit = 0.0;     // int u^{2*}
  double pow_crit_m1 = 0.0;  // int u^{2*-1}
  double l1 = 0.0;           // int u
  double grad_l1 = 0.0;      // int |grad u|
  double pow_crit_m2 = 0.0;  // int u^{2*-2}
  double l2 = 0.0;           // int u^2
  /// int |grad U_eps|^2 - int |grad u|^2, integrated directly over |x| > delta.
  double grad2_deficit = 0.0;
  /// int U_eps^{2*} - int u^{2*}, integrated directly over |x| > delta.
  double pow_crit_deficit = 0.0;
};

/// Throws PreconditionError unless eps < delta / 10.
BnIntegrals bn_integrals(double eps, const CutoffSpec& cutoff, int dim);

struct OrderCheck {
  std::string quantity;
  double expected = 0.0;
  double slope = 0.0;
  double halfwidth = 0.0;  // 95% Student-t
  double intercept = 0.0;
  /// The quantity was divided by |ln eps| before fitting.
  bool log_corrected = false;
  bool pass = false;
};

struct EstimateReport {
  int dim = 0;
  CutoffSpec cutoff;
  std::vector<double> eps;
  std::vector<BnIntegrals> rows;
  std::vector<OrderCheck> checks;
  double tolerance = 0.15;
  bool all_pass() const;
};

/// 7 log-spaced points from 1e-1 down to 1e-3.
std::vector<double> default_eps_grid();

/// Sweeps bn_integrals over `eps` (strictly decreasing, >= 6 points over two decades) and fits
/// log-log slopes against the expected orders.
EstimateReport order_fit(int dim, const CutoffSpec& cutoff, const std::vector<double>& eps, double tolerance = 0.15);

struct RayMax {
  double closed_form = 0.0;
  double direct = 0.0;
  double t_max = 0.0;
};

/// max_{t>0} J(t (s u, t u)) from the radial integrals, in closed form and by golden section.
RayMax ray_max(double eps, const CutoffSpec& cutoff, const LimitParams& lp, double kappa1, double kappa2,
               double s_lambda, double t_lambda);

/// True when kappa lies within `tol` (relative to gamma_1) of a Dirichlet eigenvalue of the box.
bool resonant_kappa(const BoxDomain& domain, double kappa, double tol = 1e-9);

struct ClaimSetup {
  BoxDomain domain{std::vector<double>{1.0}};
  double kappa1 = 0.0;
  double kappa2 = 0.0;
  LimitParams lp;
  CutoffSpec cutoff;
  double s_lambda = 0.0;
  double t_lambda = 0.0;
  /// S_{infty,lambda}^{N/2} / N.
  double bound = 0.0;
};

struct ClaimRow {
  double eps = 0.0;
  double best = 0.0;
  double ray = 0.0;
  double bound = 0.0;
  double radius = 0.0;
  int tilde_dim = 0;
  int region_samples = 0;
  int region_positive = 0;
  bool below = false;
};

struct ClaimReport {
  std::vector<ClaimRow> rows;
  bool all_below() const;
};

/// Empirical sup of J over {t u_eps + w : 0 < t <= R, w in X-tilde}, per eps. X-tilde is
/// sampled (`samples` random starts plus w = 0) and locally ascended. Throws PreconditionError
/// for resonant kappa or when the cut-off ball does not fit in the box.
ClaimReport claim_sweep(const ClaimSetup& setup, const std::vector<double>& eps, int samples, std::uint64_t seed);

struct SubBox {
  std::vector<double> lower;
  std::vector<double> upper;
};

struct MixedNormResult {
  double constant = 0.0;
  Vec w1;  // coefficients over the X-tilde_1 modes
  Vec w2;
  int starts = 0;
};

/// min of int_omega |w1|^alpha |w2|^beta over ||w1|| = ||w2|| = 1 in X-tilde_1 x X-tilde_2.
MixedNormResult mixed_norm_constant(const SystemParams& params, const BasisPtr& basis, const SubBox& omega,
                                    int budget, std::uint64_t seed);

/// q^{-1/(q-1)} (1 - 1/q).
double sharp_cq(double q);

struct QCheck {
  double q = 0.0;
  double constant = 0.0;
  double worst_excess = 0.0;  // max over r of (grid max - bound) / max(|bound|, tiny)
  bool pass = false;
};

struct AbCheck {
  double alpha = 0.0;
  double beta = 0.0;
  double radius = 0.0;
  double constant = 0.0;
  double worst_excess = 0.0;
  bool pass = false;
};

struct CalculusReport {
  std::vector<QCheck> q;
  std::vector<AbCheck> ab;
  bool pass() const;
};

/// max over an `points`-grid of s in [0, 2 s*] of r s - s^q.
double q_grid_max(double q, double r, int points = 10000);
/// max over a points x points grid of [0,R]^2 of r s1 s2 - s1^alpha s2^beta.
double ab_grid_max(double alpha, double beta, double radius, double r, int points = 300);

QCheck check_q_inequality(double q, const std::vector<double>& r_grid, int points = 10000);
/// Fits C as the refined sup over r of grid max / max{r^{a/(a-1)}, r^{b/(b-1)}}, then verifies
/// on `r_grid`.
AbCheck check_ab_inequality(double alpha, double beta, double radius, const std::vector<double>& r_grid,
                            int points = 300);

/// 0 plus `points` log-spaced values in [1e-3, 1e3].
std::vector<double> default_r_grid(int points = 200);

CalculusReport calculus_inequalities(const std::vector<double>& qs,
                                     const std::vector<std::pair<double, double>>& exponents, double radius,
                                     const std::vector<double>& r_grid);

}  // namespace wcs
