#include "wcs/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <utility>

#include "wcs/optim.hpp"
#include "wcs/radial.hpp"

namespace wcs {

CutoffSpec CutoffSpec::for_domain(const BoxDomain& domain) {
  const double delta = domain.inscribed_radius() / 8.0;
  return {delta, 2.0 * delta};
}

void CutoffSpec::validate() const {
  if (!(delta > 0.0) || !(support > delta)) throw PreconditionError("cut-off: need 0 < delta < support radius");
}

double CutoffSpec::value(double r) const {
  if (r <= delta) return 1.0;
  if (r >= support) return 0.0;
  const double x = (r - delta) / (support - delta);
  return 1.0 - x * x * x * (10.0 - 15.0 * x + 6.0 * x * x);
}

double CutoffSpec::derivative(double r) const {
  if (r <= delta || r >= support) return 0.0;
  const double x = (r - delta) / (support - delta);
  return -30.0 * x * x * (1.0 - x) * (1.0 - x) / (support - delta);
}

BnIntegrals bn_integrals(double eps, const CutoffSpec& cutoff, int dim) {
  cutoff.validate();
  if (dim < 3) throw PreconditionError("bn_integrals: dimension must be at least 3");
  if (!(eps > 0.0) || !(eps < cutoff.delta / 10.0)) throw PreconditionError("bn_integrals: need 0 < eps < delta/10");
  const double q = 2.0 * dim / (dim - 2.0);
  auto u = [&](double r) { return cutoff.value(r) * bubble_value(dim, eps, r); };
  auto du = [&](double r) {
    return cutoff.derivative(r) * bubble_value(dim, eps, r) + cutoff.value(r) * bubble_derivative(dim, eps, r);
  };
  const std::vector<double> breaks{cutoff.delta, 0.5 * (cutoff.delta + cutoff.support), cutoff.support};
  auto ball = [&](const std::function<double(double)>& g) {
    return integrate_shell(g, dim, 0.0, cutoff.support, eps, breaks).value;
  };
  auto outside = [&](const std::function<double(double)>& g) {
    return integrate_shell(g, dim, cutoff.delta, kInfinity, eps, breaks).value;
  };
  BnIntegrals b;
  b.eps = eps;
  b.grad2 = ball([&](double r) { return du(r) * du(r); });
  b.pow_crit = ball([&](double r) { return std::pow(u(r), q); });
  b.pow_crit_m1 = ball([&](double r) { return std::pow(u(r), q - 1.0); });
  b.l1 = ball(u);
  b.grad_l1 = ball([&](double r) { return std::abs(du(r)); });
  b.pow_crit_m2 = ball([&](double r) { return std::pow(u(r), q - 2.0); });
  b.l2 = ball([&](double r) { return u(r) * u(r); });
  b.grad2_deficit = outside([&](double r) {
    const double full = bubble_derivative(dim, eps, r);
    const double cut = du(r);
    return full * full - cut * cut;
  });
  b.pow_crit_deficit = outside([&](double r) {
    return std::pow(bubble_value(dim, eps, r), q) * (1.0 - std::pow(cutoff.value(r), q));
  });
  return b;
}

bool EstimateReport::all_pass() const {
  return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const OrderCheck& c) { return c.pass; });
}

std::vector<double> default_eps_grid() {
  std::vector<double> e;
  for (int i = 0; i < 7; ++i) e.push_back(std::pow(10.0, -1.0 - 2.0 * i / 6.0));
  return e;
}

EstimateReport order_fit(int dim, const CutoffSpec& cutoff, const std::vector<double>& eps, double tolerance) {
  if (eps.size() < 6) throw PreconditionError("order_fit: need at least 6 eps values");
  for (std::size_t i = 1; i < eps.size(); ++i) {
    if (!(eps[i] < eps[i - 1])) throw PreconditionError("order_fit: eps grid must be strictly decreasing");
  }
  if (!(eps.front() / eps.back() >= 100.0 * (1.0 - 1e-12))) {
    throw PreconditionError("order_fit: eps grid must span two decades");
  }
  EstimateReport rep;
  rep.dim = dim;
  rep.cutoff = cutoff;
  rep.eps = eps;
  rep.tolerance = tolerance;
  for (double e : eps) rep.rows.push_back(bn_integrals(e, cutoff, dim));

  const double n = dim;
  const bool n4 = dim == 4;
  struct Quantity {
    const char* name;
    double BnIntegrals::*field;
    double expected;
    bool log_corrected;
  };
  const std::vector<Quantity> quantities{
      {"grad2_deficit", &BnIntegrals::grad2_deficit, n - 2.0, false},
      {"pow_crit_deficit", &BnIntegrals::pow_crit_deficit, n, false},
      {"pow_crit_m1", &BnIntegrals::pow_crit_m1, (n - 2.0) / 2.0, false},
      {"l1", &BnIntegrals::l1, (n - 2.0) / 2.0, false},
      {"grad_l1", &BnIntegrals::grad_l1, (n - 2.0) / 2.0, false},
      {"pow_crit_m2", &BnIntegrals::pow_crit_m2, 2.0, n4},
      {"l2", &BnIntegrals::l2, 2.0, n4},
  };
  std::vector<double> x;
  for (double e : eps) x.push_back(std::log(e));
  for (const auto& s : quantities) {
    std::vector<double> y;
    for (const auto& row : rep.rows) {
      double v = std::abs(row.*(s.field));
      if (s.log_corrected) v /= std::abs(std::log(row.eps));
      if (!(v > 0.0) || !std::isfinite(v)) throw PreconditionError(std::string("order_fit: degenerate values for ") + s.name);
      y.push_back(std::log(v));
    }
    const auto fit = fit_line(x, y);
    OrderCheck c;
    c.quantity = s.name;
    c.expected = s.expected;
    c.slope = fit.slope;
    c.halfwidth = fit.slope_halfwidth;
    c.intercept = fit.intercept;
    c.log_corrected = s.log_corrected;
    c.pass = std::abs(fit.slope - s.expected) <= tolerance;
    rep.checks.push_back(c);
  }
  return rep;
}

namespace {

struct RayData {
  double quad = 0.0;   // (s^2+t^2) G - (kappa1 s^2 + kappa2 t^2) L2
  double nonlin = 0.0;  // (mu1 s^q + mu2 t^q + q lambda s^a t^b) int u^q
  double q = 0.0;
  double energy(double tau) const { return 0.5 * tau * tau * quad - std::pow(tau, q) * nonlin / q; }
};

RayData ray_data(const BnIntegrals& b, const LimitParams& lp, double kappa1, double kappa2, double s, double t) {
  RayData d;
  d.q = lp.critical();
  d.quad = (s * s + t * t) * b.grad2 - (kappa1 * s * s + kappa2 * t * t) * b.l2;
  d.nonlin = (lp.mu1 * std::pow(s, d.q) + lp.mu2 * std::pow(t, d.q) +
              d.q * lp.lambda * std::pow(s, lp.alpha) * std::pow(t, lp.beta)) *
             b.pow_crit;
  return d;
}

/// max over tau in [0, hi] of f by a coarse scan and golden-section refinement.
ScalarMin maximize_on(const std::function<double(double)>& f, double hi, int scan_points, double rel_tol) {
  int best = 0;
  double best_v = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= scan_points; ++i) {
    const double v = f(hi * i / scan_points);
    if (v > best_v) {
      best_v = v;
      best = i;
    }
  }
  const double a = hi * std::max(best - 1, 0) / scan_points;
  const double b = hi * std::min(best + 1, scan_points) / scan_points;
  const auto m = golden_section([&](double x) { return -f(x); }, a, b, rel_tol * hi);
  if (-m.value >= best_v) return {m.x, -m.value};
  return {hi * best / scan_points, best_v};
}

}  // namespace

RayMax ray_max(double eps, const CutoffSpec& cutoff, const LimitParams& lp, double kappa1, double kappa2,
               double s_lambda, double t_lambda) {
  lp.validate();
  if (!(s_lambda > 0.0 && t_lambda > 0.0)) throw PreconditionError("ray_max: amplitudes must be positive");
  const auto b = bn_integrals(eps, cutoff, lp.dim);
  const auto d = ray_data(b, lp, kappa1, kappa2, s_lambda, t_lambda);
  RayMax r;
  const double n = lp.dim;
  if (d.quad > 0.0) {
    r.closed_form = std::pow(d.quad / std::pow(d.nonlin, 2.0 / d.q), n / 2.0) / n;
  }
  double hi = 1.0;
  while (d.energy(hi) > 0.0) hi *= 2.0;
  const auto m = maximize_on([&](double tau) { return d.energy(tau); }, hi, 400, 1e-13);
  r.direct = std::max(m.value, 0.0);
  r.t_max = m.value > 0.0 ? m.x : 0.0;
  return r;
}

namespace {

double mode_value(const BoxDomain& d, const MultiIndex& k, const double* x) {
  double v = 1.0;
  for (int i = 0; i < d.dim(); ++i) {
    const double l = d.length(i);
    v *= std::sqrt(2.0 / l) * std::sin(M_PI * k[static_cast<std::size_t>(i)] * x[i] / l);
  }
  return v;
}

double mode_eigenvalue(const BoxDomain& d, const MultiIndex& k) {
  double g = 0.0;
  for (int i = 0; i < d.dim(); ++i) {
    const double a = k[static_cast<std::size_t>(i)] / d.length(i);
    g += a * a;
  }
  return M_PI * M_PI * g;
}

/// Multi-indices with gamma_k <= bound, in the stored order of SineBasis.
std::vector<MultiIndex> modes_below(const BoxDomain& d, double bound) {
  std::vector<int> cut;
  for (int i = 0; i < d.dim(); ++i) {
    cut.push_back(std::max(1, static_cast<int>(std::floor(d.length(i) * std::sqrt(std::max(bound, 0.0)) / M_PI)) + 1));
  }
  const SineBasis basis(d, cut);
  std::vector<MultiIndex> out;
  for (Eigen::Index i = 0; i < basis.size(); ++i) {
    if (basis.eigenvalues()[i] <= bound) out.push_back(basis.mode(i));
  }
  return out;
}

}  // namespace

bool resonant_kappa(const BoxDomain& domain, double kappa, double tol) {
  const double g1 = mode_eigenvalue(domain, MultiIndex(static_cast<std::size_t>(domain.dim()), 1));
  const double t = tol * g1;
  for (const auto& k : modes_below(domain, kappa + t)) {
    if (std::abs(mode_eigenvalue(domain, k) - kappa) <= t) return true;
  }
  return false;
}

bool ClaimReport::all_below() const {
  return !rows.empty() && std::all_of(rows.begin(), rows.end(), [](const ClaimRow& r) { return r.below; });
}

namespace {

/// Product rule on a ball: radial Gauss-Legendre panels graded towards the origin at scale
/// eps, times a hyperspherical-angle product rule normalised to the exact sphere area.
struct BallRule {
  std::vector<double> radius;
  std::vector<double> weight;
  std::vector<std::vector<double>> point;
};

BallRule ball_rule(int dim, const std::vector<double>& center, double eps, const CutoffSpec& cutoff, int n_theta,
                   int n_phi, int n_radial) {
  std::vector<double> breaks{0.0};
  for (int k = -4; k < 200; ++k) {
    const double x = eps * std::ldexp(1.0, k);
    if (x >= cutoff.delta) break;
    breaks.push_back(x);
  }
  breaks.push_back(cutoff.delta);
  breaks.push_back(0.5 * (cutoff.delta + cutoff.support));
  breaks.push_back(cutoff.support);
  std::vector<double> rn;
  std::vector<double> rw;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    std::vector<double> nodes;
    std::vector<double> weights;
    gauss_legendre(n_radial, breaks[i], breaks[i + 1], nodes, weights);
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      rn.push_back(nodes[j]);
      rw.push_back(weights[j] * std::pow(nodes[j], dim - 1));
    }
  }

  std::vector<double> tn;
  std::vector<double> tw;
  gauss_legendre(n_theta, 0.0, M_PI, tn, tw);
  const int nt = dim - 2;
  std::vector<std::vector<double>> dirs;
  std::vector<double> dw;
  std::vector<int> idx(static_cast<std::size_t>(std::max(nt, 0)), 0);
  while (true) {
    for (int p = 0; p < n_phi; ++p) {
      const double phi = 2.0 * M_PI * p / n_phi;
      std::vector<double> x(static_cast<std::size_t>(dim));
      double w = 2.0 * M_PI / n_phi;
      double sprod = 1.0;
      for (int j = 0; j < nt; ++j) {
        const double th = tn[static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])];
        x[static_cast<std::size_t>(j)] = sprod * std::cos(th);
        w *= tw[static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])] * std::pow(std::sin(th), dim - 2 - j);
        sprod *= std::sin(th);
      }
      x[static_cast<std::size_t>(dim - 2)] = sprod * std::cos(phi);
      x[static_cast<std::size_t>(dim - 1)] = sprod * std::sin(phi);
      dirs.push_back(std::move(x));
      dw.push_back(w);
    }
    int j = 0;
    while (j < nt && ++idx[static_cast<std::size_t>(j)] == n_theta) idx[static_cast<std::size_t>(j++)] = 0;
    if (j == nt) break;
  }
  double total = 0.0;
  for (double w : dw) total += w;
  const double scale = sphere_area(dim) / total;

  BallRule rule;
  for (std::size_t i = 0; i < rn.size(); ++i) {
    for (std::size_t a = 0; a < dirs.size(); ++a) {
      std::vector<double> p(static_cast<std::size_t>(dim));
      for (int c = 0; c < dim; ++c) p[static_cast<std::size_t>(c)] = center[static_cast<std::size_t>(c)] + rn[i] * dirs[a][static_cast<std::size_t>(c)];
      rule.radius.push_back(rn[i]);
      rule.weight.push_back(rw[i] * dw[a] * scale);
      rule.point.push_back(std::move(p));
    }
  }
  return rule;
}

/// J(tau u_eps + w) with w in X-tilde, by radial integrals for u-only terms, a ball rule for the
/// terms mixing u and w, and a tensor Gauss rule on the box for w-only terms.
class ClaimEvaluator {
 public:
  ClaimEvaluator(const ClaimSetup& setup, double eps, const std::vector<MultiIndex>& t1,
                 const std::vector<MultiIndex>& t2)
      : s_(setup), q_(setup.lp.critical()) {
    const int dim = s_.lp.dim;
    const auto b = bn_integrals(eps, s_.cutoff, dim);
    ray_ = ray_data(b, s_.lp, s_.kappa1, s_.kappa2, s_.s_lambda, s_.t_lambda);
    m1_ = static_cast<Eigen::Index>(t1.size());
    m2_ = static_cast<Eigen::Index>(t2.size());
    const int nth = dim <= 4 ? 4 : 3;
    const auto ball = ball_rule(dim, s_.domain.center(), eps, s_.cutoff, nth, 2 * nth, 8);
    const auto nb = static_cast<Eigen::Index>(ball.weight.size());
    ball_w_ = Eigen::Map<const Vec>(ball.weight.data(), nb);
    ball_u_.resize(nb);
    ball_e1_.resize(nb, m1_);
    ball_e2_.resize(nb, m2_);
    for (Eigen::Index i = 0; i < nb; ++i) {
      const double r = ball.radius[static_cast<std::size_t>(i)];
      ball_u_[i] = s_.cutoff.value(r) * bubble_value(dim, eps, r);
      const double* x = ball.point[static_cast<std::size_t>(i)].data();
      for (Eigen::Index k = 0; k < m1_; ++k) ball_e1_(i, k) = mode_value(s_.domain, t1[static_cast<std::size_t>(k)], x);
      for (Eigen::Index k = 0; k < m2_; ++k) ball_e2_(i, k) = mode_value(s_.domain, t2[static_cast<std::size_t>(k)], x);
    }
    gam1_.resize(m1_);
    gam2_.resize(m2_);
    for (Eigen::Index k = 0; k < m1_; ++k) gam1_[k] = mode_eigenvalue(s_.domain, t1[static_cast<std::size_t>(k)]);
    for (Eigen::Index k = 0; k < m2_; ++k) gam2_[k] = mode_eigenvalue(s_.domain, t2[static_cast<std::size_t>(k)]);
    // B_i(u, e_k) = (gamma_k - kappa_i) int u e_k.
    lin1_ = (gam1_.array() - s_.kappa1).matrix().cwiseProduct(ball_e1_.transpose() * ball_w_.cwiseProduct(ball_u_));
    lin2_ = (gam2_.array() - s_.kappa2).matrix().cwiseProduct(ball_e2_.transpose() * ball_w_.cwiseProduct(ball_u_));

    int kmax = 1;
    for (const auto& k : t1) kmax = std::max(kmax, *std::max_element(k.begin(), k.end()));
    for (const auto& k : t2) kmax = std::max(kmax, *std::max_element(k.begin(), k.end()));
    const int per_axis = std::max(8, 2 * kmax + 6);
    std::vector<std::vector<double>> an(static_cast<std::size_t>(dim));
    std::vector<std::vector<double>> aw(static_cast<std::size_t>(dim));
    for (int a = 0; a < dim; ++a) {
      gauss_legendre(per_axis, 0.0, s_.domain.length(a), an[static_cast<std::size_t>(a)], aw[static_cast<std::size_t>(a)]);
    }
    Eigen::Index nbox = 1;
    for (int a = 0; a < dim; ++a) nbox *= per_axis;
    box_w_.resize(nbox);
    box_e1_.resize(nbox, m1_);
    box_e2_.resize(nbox, m2_);
    std::vector<int> idx(static_cast<std::size_t>(dim), 0);
    std::vector<double> x(static_cast<std::size_t>(dim));
    for (Eigen::Index i = 0; i < nbox; ++i) {
      double w = 1.0;
      for (int a = 0; a < dim; ++a) {
        x[static_cast<std::size_t>(a)] = an[static_cast<std::size_t>(a)][static_cast<std::size_t>(idx[static_cast<std::size_t>(a)])];
        w *= aw[static_cast<std::size_t>(a)][static_cast<std::size_t>(idx[static_cast<std::size_t>(a)])];
      }
      box_w_[i] = w;
      for (Eigen::Index k = 0; k < m1_; ++k) box_e1_(i, k) = mode_value(s_.domain, t1[static_cast<std::size_t>(k)], x.data());
      for (Eigen::Index k = 0; k < m2_; ++k) box_e2_(i, k) = mode_value(s_.domain, t2[static_cast<std::size_t>(k)], x.data());
      for (int a = 0; a < dim; ++a) {
        if (++idx[static_cast<std::size_t>(a)] < per_axis) break;
        idx[static_cast<std::size_t>(a)] = 0;
      }
    }
  }

  Eigen::Index m1() const { return m1_; }
  Eigen::Index m2() const { return m2_; }
  Eigen::Index dim() const { return m1_ + m2_; }
  const RayData& ray() const { return ray_; }

  /// H^1 norm squared of w.
  double norm2(const Vec& c) const {
    return (gam1_.array() * c.head(m1_).array().square()).sum() + (gam2_.array() * c.tail(m2_).array().square()).sum();
  }
  Vec stiffness() const {
    Vec g(dim());
    g << gam1_, gam2_;
    return g;
  }

  double density(double a, double b) const {
    const auto& lp = s_.lp;
    return (lp.mu1 * pow_abs(a, q_) + lp.mu2 * pow_abs(b, q_)) / q_ + lp.lambda * pow_abs(a, lp.alpha) * pow_abs(b, lp.beta);
  }

  /// int_Omega F(w).
  double box_term(const Vec& c) const {
    const Vec w1 = m1_ > 0 ? Vec(box_e1_ * c.head(m1_)) : Vec::Zero(box_w_.size());
    const Vec w2 = m2_ > 0 ? Vec(box_e2_ * c.tail(m2_)) : Vec::Zero(box_w_.size());
    double s = 0.0;
    for (Eigen::Index i = 0; i < box_w_.size(); ++i) s += box_w_[i] * density(w1[i], w2[i]);
    return s;
  }

  /// int over the ball of F(w).
  double ball_w_term(const Vec& c) const {
    const Vec w1 = ball_part(ball_e1_, c.head(m1_));
    const Vec w2 = ball_part(ball_e2_, c.tail(m2_));
    double s = 0.0;
    for (Eigen::Index i = 0; i < ball_w_.size(); ++i) s += ball_w_[i] * density(w1[i], w2[i]);
    return s;
  }

  /// B(u, w) for the unit ray direction u = (s u, t u).
  double cross(const Vec& c) const {
    return s_.s_lambda * lin1_.dot(c.head(m1_)) + s_.t_lambda * lin2_.dot(c.tail(m2_));
  }

  double value(double tau, const Vec& c, double box) const {
    const Vec w1 = ball_part(ball_e1_, c.head(m1_));
    const Vec w2 = ball_part(ball_e2_, c.tail(m2_));
    const double a1 = tau * s_.s_lambda;
    const double a2 = tau * s_.t_lambda;
    double ball = 0.0;
    for (Eigen::Index i = 0; i < ball_w_.size(); ++i) {
      const double u = ball_u_[i];
      ball += ball_w_[i] * (density(a1 * u + w1[i], a2 * u + w2[i]) - density(w1[i], w2[i]));
    }
    const double quad = tau * tau * ray_.quad + 2.0 * tau * cross(c) +
                        ((gam1_.array() - s_.kappa1) * c.head(m1_).array().square()).sum() +
                        ((gam2_.array() - s_.kappa2) * c.tail(m2_).array().square()).sum();
    return 0.5 * quad - box - ball;
  }

 private:
  Vec ball_part(const Mat& e, const Vec& c) const {
    return e.cols() > 0 ? Vec(e * c) : Vec::Zero(ball_w_.size());
  }

  const ClaimSetup& s_;
  double q_;
  RayData ray_;
  Eigen::Index m1_ = 0;
  Eigen::Index m2_ = 0;
  Vec ball_w_;
  Vec ball_u_;
  Mat ball_e1_;
  Mat ball_e2_;
  Vec gam1_;
  Vec gam2_;
  Vec lin1_;
  Vec lin2_;
  Vec box_w_;
  Mat box_e1_;
  Mat box_e2_;
};

Vec random_direction(std::mt19937_64& rng, const Vec& stiffness) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec c(stiffness.size());
  for (Eigen::Index k = 0; k < c.size(); ++k) c[k] = normal(rng);
  if (c.norm() == 0.0) c[0] = 1.0;
  const double n = std::sqrt((stiffness.array() * c.array().square()).sum());
  return c / n;
}

}  // namespace

ClaimReport claim_sweep(const ClaimSetup& setup, const std::vector<double>& eps, int samples, std::uint64_t seed) {
  setup.lp.validate();
  setup.cutoff.validate();
  if (setup.domain.dim() != setup.lp.dim) throw PreconditionError("claim_sweep: domain dimension differs from N");
  if (!(setup.cutoff.support <= setup.domain.inscribed_radius())) {
    throw PreconditionError("claim_sweep: cut-off support does not fit in the box");
  }
  if (!(setup.kappa1 > 0.0 && setup.kappa2 > 0.0)) throw PreconditionError("claim_sweep: kappa1, kappa2 must be positive");
  if (resonant_kappa(setup.domain, setup.kappa1) || resonant_kappa(setup.domain, setup.kappa2)) {
    throw PreconditionError("claim_sweep: kappa is a Dirichlet eigenvalue");
  }
  const auto t1 = modes_below(setup.domain, setup.kappa1);
  const auto t2 = modes_below(setup.domain, setup.kappa2);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  ClaimReport rep;
  for (double e : eps) {
    ClaimRow row;
    row.eps = e;
    row.bound = setup.bound;
    const auto rm = ray_max(e, setup.cutoff, setup.lp, setup.kappa1, setup.kappa2, setup.s_lambda, setup.t_lambda);
    row.ray = rm.closed_form;
    row.tilde_dim = static_cast<int>(t1.size() + t2.size());
    const ClaimEvaluator ev(setup, e, t1, t2);
    const auto& rd = ev.ray();
    const double tau0 = rd.quad > 0.0 ? std::pow(rd.q * rd.quad / (2.0 * rd.nonlin), 1.0 / (rd.q - 2.0)) : 1.0;
    const double r_t = 2.0 * tau0;

    if (ev.dim() == 0) {
      row.radius = r_t;
      row.best = rm.direct;
      for (int i = 0; i < 2 * samples + 4; ++i) {
        const double tau = r_t * (1.0 + 2.0 * unif(rng));
        ++row.region_samples;
        row.region_positive += rd.energy(tau) > 0.0 ? 1 : 0;
      }
      row.below = row.best < row.bound;
      rep.rows.push_back(row);
      continue;
    }

    const Vec stiff = ev.stiffness();
    // Coercivity radius for w: rho^q Phi(w^) >= R_t^2 A / 2 + R_t |B(u,w^)| rho along sampled unit
    // directions, Phi(w^) = int outside the ball of F(w^).
    std::vector<Vec> dirs;
    for (Eigen::Index k = 0; k < ev.dim(); ++k) {
      Vec c = Vec::Zero(ev.dim());
      c[k] = 1.0 / std::sqrt(stiff[k]);
      dirs.push_back(c);
    }
    for (int i = 0; i < 8; ++i) dirs.push_back(random_direction(rng, stiff));
    double r_w = r_t;
    for (const auto& c : dirs) {
      const double phi = ev.box_term(c) - ev.ball_w_term(c);
      const double lin = std::abs(ev.cross(c));
      const double head = 0.5 * r_t * r_t * std::max(rd.quad, 0.0);
      if (!(phi > 0.0)) continue;
      double rho = 1e-3;
      while (std::pow(rho, rd.q) * phi < head + r_t * lin * rho) rho *= 1.25;
      r_w = std::max(r_w, 2.0 * rho);
    }
    row.radius = std::max(r_t, r_w);
    const double radius = row.radius;

    auto tau_max = [&](const Vec& c) {
      const double box = ev.box_term(c);
      return maximize_on([&](double tau) { return ev.value(tau, c, box); }, radius, 24, 1e-9);
    };

    std::vector<Vec> starts{Vec::Zero(ev.dim())};
    const double unorm = std::sqrt(std::max(rd.quad, 0.0));
    for (int i = 0; i < samples; ++i) starts.push_back(random_direction(rng, stiff) * (0.5 * tau0 * unorm * unif(rng)));
    double best = -std::numeric_limits<double>::infinity();
    for (auto c : starts) {
      auto cur = tau_max(c);
      double eta = 1.0;
      for (int it = 0; it < 12; ++it) {
        const double box = ev.box_term(c);
        Vec grad(ev.dim());
        for (Eigen::Index k = 0; k < ev.dim(); ++k) {
          const double h = 1e-6 * (1.0 + std::abs(c[k])) / std::sqrt(stiff[k]);
          Vec cp = c;
          Vec cm = c;
          cp[k] += h;
          cm[k] -= h;
          grad[k] = (ev.value(cur.x, cp, ev.box_term(cp)) - ev.value(cur.x, cm, ev.box_term(cm))) / (2.0 * h);
        }
        (void)box;
        const Vec dir = grad.cwiseQuotient(stiff);
        bool moved = false;
        for (int k = 0; k < 8; ++k) {
          const Vec ct = c + eta * dir;
          if (std::sqrt(ev.norm2(ct)) <= radius) {
            const auto nt = tau_max(ct);
            if (nt.value > cur.value) {
              c = ct;
              cur = nt;
              moved = true;
              eta *= 2.0;
              break;
            }
          }
          eta *= 0.25;
        }
        if (!moved) break;
      }
      best = std::max(best, cur.value);
    }
    row.best = best;

    for (int i = 0; i < 2 * samples + 4; ++i) {
      const bool big_t = i % 2 == 0;
      const double tau = big_t ? radius * (1.0 + unif(rng)) : radius * unif(rng);
      const double wn = big_t ? 2.0 * radius * unif(rng) : radius * (1.0 + unif(rng));
      const Vec c = random_direction(rng, stiff) * wn;
      ++row.region_samples;
      row.region_positive += ev.value(tau, c, ev.box_term(c)) > 0.0 ? 1 : 0;
    }
    row.below = row.best < row.bound;
    rep.rows.push_back(row);
  }
  return rep;
}

MixedNormResult mixed_norm_constant(const SystemParams& params, const BasisPtr& basis, const SubBox& omega, int budget,
                                    std::uint64_t seed) {
  const auto& dom = basis->domain();
  const int dim = dom.dim();
  if (omega.lower.size() != static_cast<std::size_t>(dim) || omega.upper.size() != static_cast<std::size_t>(dim)) {
    throw PreconditionError("mixed_norm_constant: subbox dimension mismatch");
  }
  for (int a = 0; a < dim; ++a) {
    const auto i = static_cast<std::size_t>(a);
    if (!(omega.lower[i] >= 0.0 && omega.upper[i] > omega.lower[i] && omega.upper[i] <= dom.length(a))) {
      throw PreconditionError("mixed_norm_constant: subbox must be a nonempty box inside the domain");
    }
  }
  const auto split = spectral_split(params, *basis);
  const auto t1 = split.component(1).tilde();
  const auto t2 = split.component(2).tilde();
  if (t1.empty() || t2.empty()) throw PreconditionError("mixed_norm_constant: X-tilde is trivial for a component");

  std::vector<std::vector<double>> an(static_cast<std::size_t>(dim));
  std::vector<std::vector<double>> aw(static_cast<std::size_t>(dim));
  const int per_axis = std::max(16, 2 * basis->max_cutoff() + 8);
  for (int a = 0; a < dim; ++a) {
    const auto i = static_cast<std::size_t>(a);
    gauss_legendre(per_axis, omega.lower[i], omega.upper[i], an[i], aw[i]);
  }
  Eigen::Index nodes = 1;
  for (int a = 0; a < dim; ++a) nodes *= per_axis;
  const auto m1 = static_cast<Eigen::Index>(t1.size());
  const auto m2 = static_cast<Eigen::Index>(t2.size());
  Mat e1(nodes, m1);
  Mat e2(nodes, m2);
  Vec wts(nodes);
  std::vector<int> idx(static_cast<std::size_t>(dim), 0);
  std::vector<double> x(static_cast<std::size_t>(dim));
  for (Eigen::Index n = 0; n < nodes; ++n) {
    double w = 1.0;
    for (int a = 0; a < dim; ++a) {
      const auto i = static_cast<std::size_t>(a);
      x[i] = an[i][static_cast<std::size_t>(idx[i])];
      w *= aw[i][static_cast<std::size_t>(idx[i])];
    }
    wts[n] = w;
    for (Eigen::Index k = 0; k < m1; ++k) e1(n, k) = basis->evaluate(t1[static_cast<std::size_t>(k)], x);
    for (Eigen::Index k = 0; k < m2; ++k) e2(n, k) = basis->evaluate(t2[static_cast<std::size_t>(k)], x);
    for (int a = 0; a < dim; ++a) {
      const auto i = static_cast<std::size_t>(a);
      if (++idx[i] < per_axis) break;
      idx[i] = 0;
    }
  }
  Vec sq1(m1);
  Vec sq2(m2);
  for (Eigen::Index k = 0; k < m1; ++k) sq1[k] = std::sqrt(basis->eigenvalues()[t1[static_cast<std::size_t>(k)]]);
  for (Eigen::Index k = 0; k < m2; ++k) sq2[k] = std::sqrt(basis->eigenvalues()[t2[static_cast<std::size_t>(k)]]);
  const double al = params.alpha;
  const double be = params.beta;

  // z = (z1, z2) maps to w_i = sum_k z_ik e_k / (|z_i| sqrt(gamma_k)), so ||w_i|| = 1.
  auto coeffs = [&](const Vec& z, Vec& c1, Vec& c2) {
    c1 = z.head(m1).cwiseQuotient(sq1) / z.head(m1).norm();
    c2 = z.tail(m2).cwiseQuotient(sq2) / z.tail(m2).norm();
  };
  auto value = [&](const Vec& z) {
    Vec c1;
    Vec c2;
    coeffs(z, c1, c2);
    const Vec w1 = e1 * c1;
    const Vec w2 = e2 * c2;
    double s = 0.0;
    for (Eigen::Index n = 0; n < nodes; ++n) s += wts[n] * pow_abs(w1[n], al) * pow_abs(w2[n], be);
    return s;
  };
  auto grad = [&](const Vec& z) {
    Vec c1;
    Vec c2;
    coeffs(z, c1, c2);
    const Vec w1 = e1 * c1;
    const Vec w2 = e2 * c2;
    Vec g1n(nodes);
    Vec g2n(nodes);
    for (Eigen::Index n = 0; n < nodes; ++n) {
      g1n[n] = wts[n] * al * signed_pow(w1[n], al - 1.0) * pow_abs(w2[n], be);
      g2n[n] = wts[n] * be * pow_abs(w1[n], al) * signed_pow(w2[n], be - 1.0);
    }
    const Vec dc1 = e1.transpose() * g1n;
    const Vec dc2 = e2.transpose() * g2n;
    // Chain rule through c_i = P z_i / |z_i| with P = diag(1/sqrt(gamma)).
    auto back = [](const Vec& zi, const Vec& sq, const Vec& dci) {
      const double zn = zi.norm();
      const Vec dy = dci.cwiseQuotient(sq);
      const Vec u = zi / zn;
      return Vec((dy - u.dot(dy) * u) / zn);
    };
    Vec g(m1 + m2);
    g << back(z.head(m1), sq1, dc1), back(z.tail(m2), sq2, dc2);
    return g;
  };

  MixedNormResult r;
  r.constant = std::numeric_limits<double>::infinity();
  std::vector<Vec> starts;
  if (m1 == 1 && m2 == 1) {
    starts.push_back(Vec::Ones(2));
  } else {
    for (Eigen::Index a = 0; a < m1; ++a) {
      for (Eigen::Index b = 0; b < m2; ++b) {
        Vec z = Vec::Zero(m1 + m2);
        z[a] = 1.0;
        z[m1 + b] = 1.0;
        starts.push_back(z);
      }
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int i = 0; i < budget; ++i) {
      Vec z(m1 + m2);
      for (Eigen::Index k = 0; k < z.size(); ++k) z[k] = normal(rng);
      if (z.head(m1).norm() == 0.0) z[0] = 1.0;
      if (z.tail(m2).norm() == 0.0) z[m1] = 1.0;
      starts.push_back(z);
    }
  }
  BfgsOptions opts;
  opts.max_iterations = 300;
  opts.gradient_tol = 1e-13;
  for (const auto& z0 : starts) {
    ++r.starts;
    Vec zbest = z0;
    double vbest = value(z0);
    if (!(m1 == 1 && m2 == 1)) {
      const auto res = bfgs_minimize(value, grad, z0, opts);
      if (res.value < vbest) {
        vbest = res.value;
        zbest = res.x;
      }
    }
    if (vbest < r.constant) {
      r.constant = vbest;
      coeffs(zbest, r.w1, r.w2);
    }
  }
  return r;
}

double sharp_cq(double q) {
  if (!(q > 1.0)) throw PreconditionError("sharp_cq: q must exceed 1");
  return std::pow(q, -1.0 / (q - 1.0)) * (1.0 - 1.0 / q);
}

double q_grid_max(double q, double r, int points) {
  if (!(r > 0.0)) return 0.0;
  const double smax = 2.0 * std::pow(r / q, 1.0 / (q - 1.0));
  double best = 0.0;
  for (int i = 0; i < points; ++i) {
    const double s = smax * i / (points - 1);
    best = std::max(best, r * s - std::pow(s, q));
  }
  return best;
}

namespace {

struct AbGrid {
  std::vector<double> prod;
  std::vector<double> cost;
};

/// Grid points (s1 s2, s1^alpha s2^beta) reduced to the lower convex hull: max_k (r P_k - C_k)
/// is attained at a hull vertex for every r, so the reduction is exact.
AbGrid ab_grid(double alpha, double beta, double radius, int points) {
  std::vector<std::pair<double, double>> pts;
  pts.reserve(static_cast<std::size_t>(points) * static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    const double s1 = radius * i / (points - 1);
    for (int j = 0; j < points; ++j) {
      const double s2 = radius * j / (points - 1);
      pts.emplace_back(s1 * s2, std::pow(s1, alpha) * std::pow(s2, beta));
    }
  }
  std::sort(pts.begin(), pts.end());
  std::vector<std::pair<double, double>> hull;
  for (const auto& q : pts) {
    while (hull.size() >= 2) {
      const auto& a = hull[hull.size() - 2];
      const auto& b = hull.back();
      const double cross = (b.first - a.first) * (q.second - a.second) - (b.second - a.second) * (q.first - a.first);
      if (cross > 0.0) break;
      hull.pop_back();
    }
    hull.push_back(q);
  }
  AbGrid g;
  for (const auto& [prod, cost] : hull) {
    g.prod.push_back(prod);
    g.cost.push_back(cost);
  }
  return g;
}

double ab_max(const AbGrid& g, double r) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < g.prod.size(); ++k) best = std::max(best, r * g.prod[k] - g.cost[k]);
  return best;
}

double ab_scale(double alpha, double beta, double r) {
  return std::max(std::pow(r, alpha / (alpha - 1.0)), std::pow(r, beta / (beta - 1.0)));
}

double excess(double value, double bound) {
  const double e = value - bound;
  if (bound == 0.0) return e > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  return e / std::abs(bound);
}

}  // namespace

double ab_grid_max(double alpha, double beta, double radius, double r, int points) {
  return ab_max(ab_grid(alpha, beta, radius, points), r);
}

QCheck check_q_inequality(double q, const std::vector<double>& r_grid, int points) {
  QCheck c;
  c.q = q;
  c.constant = sharp_cq(q);
  c.worst_excess = -std::numeric_limits<double>::infinity();
  for (double r : r_grid) {
    const double bound = r > 0.0 ? c.constant * std::pow(r, q / (q - 1.0)) : 0.0;
    c.worst_excess = std::max(c.worst_excess, excess(q_grid_max(q, r, points), bound));
  }
  c.pass = c.worst_excess <= 1e-9;
  return c;
}

AbCheck check_ab_inequality(double alpha, double beta, double radius, const std::vector<double>& r_grid, int points) {
  if (!(alpha > 1.0 && beta > 1.0 && radius > 0.0)) throw PreconditionError("check_ab_inequality: bad parameters");
  AbCheck c;
  c.alpha = alpha;
  c.beta = beta;
  c.radius = radius;
  const auto g = ab_grid(alpha, beta, radius, points);
  auto ratio = [&](double logr) {
    const double r = std::exp(logr);
    return ab_max(g, r) / ab_scale(alpha, beta, r);
  };
  const int scan = 2001;
  const double lo = std::log(1e-4);
  const double hi = std::log(1e4);
  std::vector<double> vals(scan);
  for (int i = 0; i < scan; ++i) vals[static_cast<std::size_t>(i)] = ratio(lo + (hi - lo) * i / (scan - 1));
  double sup = *std::max_element(vals.begin(), vals.end());
  for (int i = 0; i < scan; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const bool left = i == 0 || vals[k] >= vals[k - 1];
    const bool right = i == scan - 1 || vals[k] >= vals[k + 1];
    if (!(left && right)) continue;
    const double a = lo + (hi - lo) * std::max(i - 1, 0) / (scan - 1);
    const double b = lo + (hi - lo) * std::min(i + 1, scan - 1) / (scan - 1);
    sup = std::max(sup, -golden_section([&](double t) { return -ratio(t); }, a, b, 1e-13).value);
  }
  c.constant = sup;
  c.worst_excess = -std::numeric_limits<double>::infinity();
  for (double r : r_grid) {
    const double bound = r > 0.0 ? c.constant * ab_scale(alpha, beta, r) : 0.0;
    c.worst_excess = std::max(c.worst_excess, excess(ab_max(g, r), bound));
  }
  c.pass = c.worst_excess <= 1e-9;
  return c;
}

std::vector<double> default_r_grid(int points) {
  std::vector<double> r{0.0};
  for (int i = 0; i < points; ++i) r.push_back(std::pow(10.0, -3.0 + 6.0 * i / (points - 1)));
  return r;
}

bool CalculusReport::pass() const {
  return std::all_of(q.begin(), q.end(), [](const QCheck& c) { return c.pass; }) &&
         std::all_of(ab.begin(), ab.end(), [](const AbCheck& c) { return c.pass; });
}

CalculusReport calculus_inequalities(const std::vector<double>& qs,
                                     const std::vector<std::pair<double, double>>& exponents, double radius,
                                     const std::vector<double>& r_grid) {
  CalculusReport rep;
  for (double q : qs) rep.q.push_back(check_q_inequality(q, r_grid));
  for (const auto& [a, b] : exponents) rep.ab.push_back(check_ab_inequality(a, b, radius, r_grid));
  return rep;
}

}  // namespace wcs
