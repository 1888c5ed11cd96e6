#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "wcs/synchronized.hpp"

using namespace wcs;

namespace {

SystemParams quadratic(double mu1, double mu2, double lambda) {
  SystemParams p;
  p.mu1 = mu1;
  p.mu2 = mu2;
  p.lambda = lambda;
  return p;
}

}  // namespace

TEST_CASE("h in the quadratic case") {
  const auto p = quadratic(1.0, 2.0, 2.0);
  for (double r : {0.3, 1.0, 2.0}) {
    CHECK(sync_h(r, p) == doctest::Approx((p.mu1 - 2.0 * p.lambda) * r * r + 2.0 * p.lambda - p.mu2).epsilon(1e-13));
  }
  CHECK(sync_h(1.0, quadratic(1.3, 1.3, 0.4)) == doctest::Approx(0.0));
  CHECK_THROWS_AS(sync_h(0.0, p), PreconditionError);
}

TEST_CASE("find_roots") {
  const auto r = find_roots(quadratic(1.0, 2.0, 2.0));
  REQUIRE(r.roots.size() == 1);
  CHECK(std::abs(r.roots[0] - std::sqrt(2.0 / 3.0)) < 1e-10);
  CHECK(r.guaranteed);

  CHECK(find_roots(quadratic(3.0, 1.0, 1.0)).roots.empty());

  const auto s = find_roots(quadratic(1.7, 1.7, 0.9));
  REQUIRE(!s.roots.empty());
  CHECK(std::any_of(s.roots.begin(), s.roots.end(), [](double x) { return std::abs(x - 1.0) < 1e-10; }));

  SystemParams sub;
  sub.alpha = sub.beta = 1.5;
  sub.p = 3.0;
  sub.dim = 6;
  const auto g = find_roots(sub);
  CHECK(g.guaranteed);
  CHECK(!g.roots.empty());
}

TEST_CASE("amplitudes and Euler identities") {
  const auto a = amplitudes(1.0, quadratic(1.0, 1.0, 1.0));
  CHECK(a.t == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-14));
  CHECK(a.s == doctest::Approx(a.t));
  const auto p = quadratic(1.0, 2.0, 2.0);
  const auto b = amplitudes(find_roots(p).roots.at(0), p);
  const auto [e1, e2] = euler_identities(b, p);
  CHECK(std::abs(e1) < 1e-10);
  CHECK(std::abs(e2) < 1e-10);
  CHECK_THROWS_AS(amplitudes(0.5, p), PreconditionError);
}

TEST_CASE("synchronized solution from a scalar solution") {
  const auto p = quadratic(1.0, 2.0, 2.0);
  auto space = make_space(make_basis(BoxDomain::unit(1), {24}));
  const SystemFunctional f(p, space);
  SolverConfig cfg;
  const ScalarFunctional unit(0.0, 1.0, 4.0, space);
  const auto w = scalar_ground_state(unit, cfg);
  const auto root = amplitudes(find_roots(p).roots.at(0), p);
  const auto sol = synchronized_solution(w.w, root, f);
  CHECK(sol.system_residual < 10.0 * sol.scalar_residual);
  CHECK(sol.point.classification == Classification::fully_nontrivial);

  auto q = p;
  q.kappa2 = 1.0;
  CHECK_THROWS_AS(synchronized_solution(w.w, root, SystemFunctional(q, space)), PreconditionError);
}

TEST_CASE("unit normalisation rescales a scalar solution") {
  auto space = make_space(make_basis(BoxDomain::unit(1), {24}));
  SolverConfig cfg;
  const ScalarFunctional f(0.0, 3.0, 4.0, space);
  const auto w = scalar_ground_state(f, cfg);
  const auto u = unit_normalize(w.w, 3.0, 4.0);
  const ScalarFunctional unit(0.0, 1.0, 4.0, space);
  CHECK(unit.gradient(u.coeffs).norm() < 1e-8 * std::max(1.0, u.coeffs.norm()));
  CHECK_THROWS_AS(unit_normalize(w.w, 0.0, 4.0), PreconditionError);
}
