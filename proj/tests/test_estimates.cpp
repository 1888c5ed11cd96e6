#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <utility>
#include <vector>

#include "wcs/estimates.hpp"

using namespace wcs;

namespace {

const CutoffSpec kCut{1.5, 3.0};

double gamma1(const BoxDomain& d) {
  double g = 0.0;
  for (double l : d.lengths()) g += M_PI * M_PI / (l * l);
  return g;
}

}  // namespace

TEST_CASE("cut-off profile") {
  CHECK(kCut.value(0.0) == 1.0);
  CHECK(kCut.value(1.5) == 1.0);
  CHECK(kCut.value(3.0) == 0.0);
  CHECK(kCut.value(2.25) == doctest::Approx(0.5));
  for (double r = 1.5; r < 3.0; r += 0.1) CHECK(kCut.value(r + 0.1) <= kCut.value(r));
  for (double r : {1.6, 2.0, 2.9}) {
    const double h = 1e-6;
    CHECK(kCut.derivative(r) == doctest::Approx((kCut.value(r + h) - kCut.value(r - h)) / (2 * h)).epsilon(1e-6));
  }
  CHECK(CutoffSpec::for_domain(BoxDomain(std::vector<double>(5, 24.0))).delta == doctest::Approx(1.5));
  CHECK_THROWS_AS((CutoffSpec{1.0, 1.0}.validate()), PreconditionError);
}

TEST_CASE("bn integrals approach the bubble norms") {
  const auto s4 = sobolev_constant(4);
  const auto b = bn_integrals(1e-3, kCut, 4);
  CHECK(std::abs(b.grad2 - s4.gradient_norm2) < 1e-2 * s4.gradient_norm2);
  CHECK(std::abs(s4.gradient_norm2 - b.grad2 - b.grad2_deficit) < 1e-9 * s4.gradient_norm2);
  CHECK(std::abs(s4.power_integral - b.pow_crit - b.pow_crit_deficit) < 1e-9 * s4.power_integral);
  CHECK_THROWS_AS(bn_integrals(0.2, kCut, 4), PreconditionError);
  CHECK_THROWS_AS(bn_integrals(1e-3, kCut, 2), PreconditionError);
}

TEST_CASE("power deficit is of order eps^N") {
  for (int n : {4, 5}) {
    const double a = bn_integrals(1e-2, kCut, n).pow_crit_deficit;
    const double b = bn_integrals(1e-3, kCut, n).pow_crit_deficit;
    CHECK(std::log10(a / b) == doctest::Approx(n).epsilon(0.02));
  }
}

TEST_CASE("property: bn integrals of positive powers decrease with eps below the core scale") {
  for (int n : {4, 5}) {
    double prev_l1 = std::numeric_limits<double>::infinity();
    double prev_l2 = std::numeric_limits<double>::infinity();
    for (double e : {1e-1, 3e-2, 1e-2, 3e-3, 1e-3}) {
      const auto b = bn_integrals(e, kCut, n);
      CHECK(b.l1 < prev_l1);
      CHECK(b.l2 < prev_l2);
      prev_l1 = b.l1;
      prev_l2 = b.l2;
    }
  }
}

TEST_CASE("order fit recovers the expected orders") {
  for (int n : {4, 5}) {
    const auto rep = order_fit(n, kCut, default_eps_grid());
    for (const auto& c : rep.checks) {
      INFO("N = " << n << ", " << c.quantity << ": slope " << c.slope << " expected " << c.expected);
      CHECK(c.pass);
      CHECK(c.log_corrected == (n == 4 && (c.quantity == "l2" || c.quantity == "pow_crit_m2")));
    }
    CHECK(rep.all_pass());
  }
  CHECK_THROWS_AS(order_fit(4, kCut, {1e-1, 1e-2, 1e-3}), PreconditionError);
  CHECK_THROWS_AS(order_fit(4, kCut, {1e-1, 8e-2, 6e-2, 4e-2, 3e-2, 2e-2}), PreconditionError);
}

TEST_CASE("default eps grid") {
  const auto e = default_eps_grid();
  REQUIRE(e.size() == 7);
  CHECK(e.front() == doctest::Approx(1e-1));
  CHECK(e.back() == doctest::Approx(1e-3));
}

TEST_CASE("ray_max closed form agrees with direct maximisation") {
  const LimitParams lp{1.0, 1.0, 1.0, 2.0, 2.0, 4};
  for (double eps : {1e-2, 1e-3}) {
    const auto r = ray_max(eps, kCut, lp, 0.2, 0.3, 0.6, 0.5);
    CHECK(std::abs(r.closed_form - r.direct) <= 1e-8 * r.closed_form);
    CHECK(r.t_max > 0.0);
  }
}

TEST_CASE("ray_max gap to the limit level shrinks as kappa tends to zero") {
  const LimitParams lp{1.0, 1.0, 1.0, 2.0, 2.0, 4};
  const double S = sobolev_constant(4).value;
  const auto si = S_infty(lp, S);
  const auto a = minimizer_amplitudes(lp, S, si.r_lambda);
  const double bound = si.value * si.value / 4.0;
  double prev_gap = std::numeric_limits<double>::infinity();
  for (double k : {1.0, 0.5, 0.25, 0.1, 0.05}) {
    const double gap = bound - ray_max(1e-3, kCut, lp, k, k, a.s, a.t).closed_form;
    CHECK(gap < prev_gap);
    prev_gap = gap;
  }
}

TEST_CASE("resonant kappa detection") {
  const BoxDomain d(std::vector<double>(4, 8.0));
  const double g1 = gamma1(d);
  CHECK(resonant_kappa(d, g1));
  CHECK(resonant_kappa(d, g1 * 7.0 / 4.0));  // k = (2,1,1,1)
  CHECK_FALSE(resonant_kappa(d, 1.5 * g1));
  CHECK_FALSE(resonant_kappa(d, 0.5 * g1));
}

TEST_CASE("claim sweep rejects resonant kappa and oversized cut-offs") {
  const BoxDomain d(std::vector<double>(4, 8.0));
  const LimitParams lp{1.0, 1.0, 1.0, 2.0, 2.0, 4};
  ClaimSetup s{d, gamma1(d), 0.5 * gamma1(d), lp, CutoffSpec::for_domain(d), 0.5, 0.5, 1.0};
  CHECK_THROWS_AS(claim_sweep(s, {1e-2}, 1, 1), PreconditionError);
  s.kappa1 = 0.5 * gamma1(d);
  s.cutoff = CutoffSpec{3.0, 6.0};
  CHECK_THROWS_AS(claim_sweep(s, {1e-2}, 1, 1), PreconditionError);
}

TEST_CASE("claim sweep in the positive-definite case reduces to the ray") {
  LimitParams lp{2.0, 1.0, 1.0, 4.0 / 3.0, 2.0, 5};
  lp.lambda = 2.0 * lambda0_threshold(lp);
  const double S = sobolev_constant(5).value;
  const auto si = S_infty(lp, S);
  const auto a = minimizer_amplitudes(lp, S, si.r_lambda);
  const BoxDomain d(std::vector<double>(5, 24.0));
  const double k = 0.5 * gamma1(d);
  const ClaimSetup s{d, k, k, lp, CutoffSpec::for_domain(d), a.s, a.t, std::pow(si.value, 2.5) / 5.0};
  const auto rep = claim_sweep(s, {1e-2, 1e-3}, 2, 1);
  REQUIRE(rep.rows.size() == 2);
  for (const auto& r : rep.rows) {
    CHECK(r.tilde_dim == 0);
    CHECK(r.best == doctest::Approx(r.ray).epsilon(1e-10));
    CHECK(r.region_positive == 0);
    CHECK(r.below);
  }
  CHECK(rep.all_below());
}

TEST_CASE("claim sweep with a nontrivial X-tilde is at least the ray value") {
  const LimitParams lp{1.0, 1.0, 1.0, 2.0, 2.0, 4};
  const double S = sobolev_constant(4).value;
  const auto si = S_infty(lp, S);
  const auto a = minimizer_amplitudes(lp, S, si.r_lambda);
  const BoxDomain d(std::vector<double>(4, 8.0));
  const double k = 1.5 * gamma1(d);
  const ClaimSetup s{d, k, k, lp, CutoffSpec::for_domain(d), a.s, a.t, si.value * si.value / 4.0};
  const auto rep = claim_sweep(s, {1e-3}, 1, 3);
  REQUIRE(rep.rows.size() == 1);
  CHECK(rep.rows[0].tilde_dim == 2);
  CHECK(rep.rows[0].best >= rep.rows[0].ray * (1.0 - 1e-6));
  CHECK(rep.rows[0].region_positive == 0);
}

TEST_CASE("mixed norm constant") {
  SystemParams p;
  p.kappa1 = p.kappa2 = 15.0;
  auto basis = make_basis(BoxDomain::unit(1), {8});
  const SubBox omega{{0.25}, {0.75}};
  const auto r = mixed_norm_constant(p, basis, omega, 4, 1);
  // X-tilde = span(e1) in both components: w_i = e1 / pi, so the constant is int_omega (e1 / pi)^4.
  const double direct = [&] {
    double s = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
      const double x = 0.25 + 0.5 * (i + 0.5) / n;
      s += std::pow(std::sqrt(2.0) * std::sin(M_PI * x) / M_PI, 4) * 0.5 / n;
    }
    return s;
  }();
  CHECK(r.constant == doctest::Approx(direct).epsilon(1e-7));
  CHECK(r.constant > 0.0);
  p.kappa1 = 5.0;
  CHECK_THROWS_AS(mixed_norm_constant(p, basis, omega, 4, 1), PreconditionError);
  p.kappa1 = 15.0;
  CHECK_THROWS_AS(mixed_norm_constant(p, basis, SubBox{{0.5}, {1.5}}, 4, 1), PreconditionError);
}

TEST_CASE("property: mixed norm constant is a lower bound over random pairs") {
  SystemParams p;
  p.kappa1 = 45.0;
  p.kappa2 = 45.0;
  auto basis = make_basis(BoxDomain::unit(1), {8});
  const SubBox omega{{0.1}, {0.6}};
  const auto r = mixed_norm_constant(p, basis, omega, 6, 5);
  REQUIRE(r.w1.size() == 2);
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Vec a(2);
    Vec b(2);
    a << n(rng), n(rng);
    b << n(rng), n(rng);
    a /= std::sqrt(M_PI * M_PI * a[0] * a[0] + 4 * M_PI * M_PI * a[1] * a[1]);
    b /= std::sqrt(M_PI * M_PI * b[0] * b[0] + 4 * M_PI * M_PI * b[1] * b[1]);
    double s = 0.0;
    const int m = 4000;
    for (int i = 0; i < m; ++i) {
      const double x = 0.1 + 0.5 * (i + 0.5) / m;
      const double e1 = std::sqrt(2.0) * std::sin(M_PI * x);
      const double e2 = std::sqrt(2.0) * std::sin(2 * M_PI * x);
      const double w1 = a[0] * e1 + a[1] * e2;
      const double w2 = b[0] * e1 + b[1] * e2;
      s += w1 * w1 * w2 * w2 * 0.5 / m;
    }
    CHECK(r.constant <= s * (1.0 + 1e-6));
  }
}

TEST_CASE("sharp constant of the (q) inequality") {
  CHECK(sharp_cq(2.0) == doctest::Approx(0.25));
  CHECK_THROWS_AS(sharp_cq(1.0), PreconditionError);
  CHECK(q_grid_max(2.0, 0.0) <= 0.0);
  CHECK(ab_grid_max(2.0, 2.0, 1.0, 0.0) <= 0.0);
}

TEST_CASE("property: (ab) grid maximum equals brute force over the full grid") {
  for (auto [a, b] : std::vector<std::pair<double, double>>{{2.0, 2.0}, {1.5, 2.5}, {3.0, 1.2}}) {
    for (double r : {0.0, 1e-3, 0.3, 1.0, 2.5, 50.0}) {
      const int n = 120;
      double best = -std::numeric_limits<double>::infinity();
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          const double s1 = 1.0 * i / (n - 1);
          const double s2 = 1.0 * j / (n - 1);
          best = std::max(best, r * s1 * s2 - std::pow(s1, a) * std::pow(s2, b));
        }
      }
      CHECK(ab_grid_max(a, b, 1.0, r, n) == doctest::Approx(best).epsilon(1e-14));
    }
  }
  CHECK(ab_grid_max(2.0, 2.0, 1.0, 1.0) == doctest::Approx(0.25).epsilon(1e-5));
}

TEST_CASE("calculus inequalities hold on the default grids") {
  const auto rep = calculus_inequalities({1.5, 2.0, 3.0}, {{2.0, 2.0}, {1.5, 2.5}}, 1.0, default_r_grid());
  for (const auto& c : rep.q) {
    INFO("q = " << c.q << " excess " << c.worst_excess);
    CHECK(c.pass);
    // The sharp constant is attained up to grid resolution.
    CHECK(c.worst_excess > -1e-3);
  }
  for (const auto& c : rep.ab) {
    INFO("(alpha, beta) = (" << c.alpha << ", " << c.beta << ") excess " << c.worst_excess);
    CHECK(c.pass);
    CHECK(c.constant > 0.0);
  }
  CHECK(rep.pass());
  CHECK(default_r_grid().front() == 0.0);
  CHECK(default_r_grid().size() == 201);
}
