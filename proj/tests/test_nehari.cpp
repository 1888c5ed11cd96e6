#include <doctest.h>

#include <cmath>
#include <random>

#include "wcs/nehari.hpp"
#include "wcs/optim.hpp"

using namespace wcs;

namespace {

constexpr double kPi2 = M_PI * M_PI;

SpacePtr unit_space(int modes = 24) { return make_space(make_basis(BoxDomain::unit(1), {modes})); }

SolverConfig solver(std::uint64_t seed = 1) {
  SolverConfig c;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("classification strings round-trip") {
  for (auto c : {Classification::trivial, Classification::semitrivial1, Classification::semitrivial2,
                 Classification::fully_nontrivial}) {
    CHECK(classification_from_string(to_string(c)) == c);
  }
  CHECK_THROWS(classification_from_string("both"));
}

TEST_CASE("Nehari residuals along the ray through e1") {
  auto space = unit_space(8);
  const SystemFunctional f(SystemParams{}, space);
  const auto& basis = space->basis_ptr();
  const PairField u(ScalarField::mode(basis, 0), ScalarField::zero(basis));
  CHECK(nehari_residuals(f, u).ray == doctest::Approx(kPi2 - 1.5).epsilon(1e-10));
  CHECK(nehari_residuals(f, u).ray == doctest::Approx(8.3696).epsilon(1e-4));
  const auto v = nehari_project(f, u);
  CHECK(v.u1.coeffs[0] == doctest::Approx(std::sqrt(kPi2 / 1.5)).epsilon(1e-10));
  CHECK(v.u1.coeffs[0] == doctest::Approx(2.56509).epsilon(1e-5));
  CHECK(std::abs(nehari_residuals(f, v).ray) < 1e-10);
  CHECK(f.value(v.stacked()) == doctest::Approx(std::pow(M_PI, 4) / 6.0).epsilon(1e-10));
  CHECK_THROWS_AS(nehari_residuals(f, PairField::zero(basis)), PreconditionError);
}

TEST_CASE("Nehari projection with a one-dimensional X-tilde") {
  auto space = unit_space(12);
  SystemParams p;
  p.kappa1 = 15.0;
  p.lambda = 3.0;
  const SystemFunctional f(p, space);
  REQUIRE(f.split().codim_plus() == 1);
  const auto& basis = space->basis_ptr();
  Vec x = Vec::Zero(f.dim());
  x[1] = 1.0;
  x[12] = 0.7;
  x[13] = -0.3;
  const auto v = nehari_project(f, PairField::from_stacked(basis, x));
  CHECK(nehari_residuals(f, v).max_abs() < 1e-8);
  // The projection maximises J over t u + X-tilde: nearby points on that set are not higher.
  const Vec y = v.stacked();
  for (double d : {-1e-3, 1e-3}) {
    Vec z = y;
    z[0] += d;
    CHECK(f.value(z) <= f.value(y) + 1e-12);
    CHECK(f.value((1.0 + d) * y) <= f.value(y) + 1e-12);
  }
}

TEST_CASE("no projection for a ray in the nonpositive cone") {
  auto space = unit_space(6);
  SystemParams p;
  p.kappa1 = 50.0;  // gamma_1, gamma_2 < 50: X-tilde_1 = span(e1, e2)
  p.kappa2 = 50.0;
  const SystemFunctional f(p, space);
  const auto& basis = space->basis_ptr();
  const PairField u(ScalarField::mode(basis, 0), ScalarField::zero(basis));
  CHECK_THROWS(nehari_project(f, u));
}

TEST_CASE("scalar ground state and c0 symmetry") {
  auto space = unit_space(24);
  const auto c0 = c0_threshold(SystemParams{}, space, solver());
  CHECK(c0.c0 > 0.0);
  CHECK(c0.w1.energy == doctest::Approx(c0.w2.energy).epsilon(1e-10));
  CHECK(c0.w1.gradient_norm < 1e-8);
  // Below the energy of the Nehari point on the e1 ray.
  CHECK(c0.c0 < std::pow(M_PI, 4) / 6.0);
  CHECK(c0.w1.energy == doctest::Approx(0.25 * c0.w1.b_value).epsilon(1e-8));
}

TEST_CASE("ground state for lambda = 50 lies below c0 and is fully nontrivial") {
  auto space = unit_space(24);
  SystemParams p;
  p.lambda = 50.0;
  const SystemFunctional f(p, space);
  const auto c0 = c0_threshold(p, space, solver());
  const auto gs = ground_state(f, solver(), &c0);
  const auto& q = gs.point;
  CHECK(q.gradient_norm < 1e-8);
  CHECK(q.energy > 0.0);
  CHECK(q.energy < c0.c0);
  CHECK(classify(q, c0.c0) == Classification::fully_nontrivial);
  CHECK(q.b_value > 0.0);
  CHECK(q.b_value < c0.b_bound());
  CHECK(nehari_residuals(f, q.u).max_abs() < 1e-8);
  // alpha = beta = 2, mu1 = mu2: the synchronized pair (w, w)/sqrt(1 + 2 lambda) has energy 2 c0/(1 + 2 lambda).
  CHECK(q.energy == doctest::Approx(2.0 * c0.c0 / (1.0 + 2.0 * p.lambda)).epsilon(1e-8));
}

TEST_CASE("classification of trivial and semitrivial points") {
  auto space = unit_space(24);
  SystemParams p;
  p.lambda = 50.0;
  const SystemFunctional f(p, space);
  const auto c0 = c0_threshold(p, space, solver());
  const auto zero = make_critical_point(f, Vec::Zero(f.dim()));
  CHECK(classify(zero, c0.c0) == Classification::trivial);
  Vec x = Vec::Zero(f.dim());
  x.head(space->modes()) = c0.w1.w.coeffs;
  const auto semi = make_critical_point(f, x);
  CHECK(semi.gradient_norm < 1e-8);
  CHECK(semi.energy >= c0.c0 - 1e-9);
  CHECK(classify(semi, c0.c0) == Classification::semitrivial1);
  // A semitrivial point with energy strictly below c0 would contradict the criterion.
  auto fake = semi;
  fake.energy = 0.5 * c0.c0;
  CHECK_THROWS_AS(classify(fake, c0.c0), ContradictionError);
}

TEST_CASE("orbit dedup") {
  auto basis = make_basis(BoxDomain::unit(1), {4});
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 1.0);
  Vec x(8);
  for (Eigen::Index i = 0; i < 8; ++i) x[i] = n(rng);
  const auto u = PairField::from_stacked(basis, x);
  Vec flipped = x;
  flipped.head(4) *= -1.0;
  const auto ids = orbit_dedup({u, PairField::from_stacked(basis, flipped), PairField::from_stacked(basis, 1.1 * x), u},
                               1e-4);
  CHECK(ids == std::vector<int>{0, 0, 1, 0});
  CHECK(orbit_distance(x, x, 4) == 0.0);
  CHECK(orbit_distance(x, flipped, 4) == 0.0);
}

TEST_CASE("multiplicity at lambda = 200 finds two orbits below c0") {
  auto space = unit_space(24);
  SystemParams p;
  p.lambda = 200.0;
  const SystemFunctional f(p, space);
  const auto c0 = c0_threshold(p, space, solver());
  const auto m = multiplicity_search(f, 2, 12, solver(), c0);
  REQUIRE(m.orbits.size() >= 2);
  std::vector<PairField> pts;
  for (const auto& o : m.orbits) {
    CHECK(o.energy > 0.0);
    CHECK(o.energy < c0.c0);
    CHECK(o.gradient_norm < 1e-8);
    CHECK(o.classification == Classification::fully_nontrivial);
    pts.push_back(o.u);
  }
  const auto ids = orbit_dedup(pts, 1e-4);
  for (std::size_t i = 0; i < ids.size(); ++i) CHECK(ids[i] == static_cast<int>(i));
  for (std::size_t i = 1; i < m.orbits.size(); ++i) CHECK(m.orbits[i].energy >= m.orbits[i - 1].energy);
}

TEST_CASE("multiplicity with tiny lambda is best effort") {
  auto space = unit_space(12);
  SystemParams p;
  p.lambda = 1e-3;
  const SystemFunctional f(p, space);
  const auto c0 = c0_threshold(p, space, solver());
  const auto m = multiplicity_search(f, 2, 4, solver(), c0);
  for (const auto& o : m.orbits) {
    CHECK(o.energy > 0.0);
    CHECK(o.energy < c0.c0);
  }
}

TEST_CASE("sphere infimum is positive and quadratic at small radius") {
  auto space = unit_space(10);
  SystemParams p;
  p.kappa1 = p.kappa2 = 5.0;
  const SystemFunctional f(p, space);
  CHECK(sphere_inf(f, 1e-3, 4, 1).estimate > 0.0);
  // In the gradient norm, J(u) = 1/2 sum (gamma-kappa)/gamma u_k^2 gamma + o(rho^2).
  const double expected = 0.5 * (kPi2 - 5.0) / kPi2;
  std::vector<double> lx;
  std::vector<double> ly;
  for (double rho : {1e-3, 2e-3, 4e-3, 8e-3}) {
    const auto s = sphere_inf(f, rho, 4, 3);
    lx.push_back(rho * rho);
    ly.push_back(s.estimate);
  }
  const auto fit = fit_line(lx, ly);
  CHECK(fit.slope == doctest::Approx(expected).epsilon(0.1));
  CHECK_THROWS_AS(sphere_inf(f, 0.0, 4, 1), PreconditionError);
}

TEST_CASE("sphere infimum is monotone in the sample budget") {
  auto space = unit_space(10);
  SystemParams p;
  p.kappa1 = 15.0;
  p.kappa2 = 20.0;
  p.lambda = 4.0;
  const SystemFunctional f(p, space);
  double prev = std::numeric_limits<double>::infinity();
  for (int budget : {1, 2, 4, 8}) {
    const double e = sphere_inf(f, 0.5, budget, 17).estimate;
    CHECK(e <= prev + 1e-12);
    prev = e;
  }
}

TEST_CASE("zm_sup: ray formula for m = 1") {
  auto space = unit_space(12);
  const auto z = zm_sup(SystemParams{}, space, 1, 1.0);
  CHECK(z.value == doctest::Approx(std::pow(M_PI, 4) / 9.0).epsilon(1e-8));
  CHECK(z.value == doctest::Approx(10.8232).epsilon(1e-5));
  CHECK_FALSE(z.exact_zero);
}

TEST_CASE("zm_sup vanishes when gamma_m is below the mean shift") {
  auto space = unit_space(12);
  SystemParams p;
  p.kappa1 = p.kappa2 = 100.0;
  const auto z = zm_sup(p, space, 3, 1.0);
  CHECK(z.exact_zero);
  CHECK(z.value == 0.0);
  const auto th = lambda_threshold(p, space, 3, 1.0);
  CHECK(th.exact_zero);
  CHECK(th.value == 0.0);
}

TEST_CASE("zm_sup decreases in lambda and the threshold brackets the crossing") {
  auto space = unit_space(16);
  const SystemParams p;
  double prev = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 10; ++i) {
    const double v = zm_sup(p, space, 3, std::pow(10.0, -2.0 + 0.5 * i)).value;
    CHECK(v > 0.0);
    CHECK(v < prev);
    prev = v;
  }
  const auto c0 = c0_threshold(p, space, solver());
  const auto th = lambda_threshold(p, space, 3, c0.c0);
  CHECK(th.upper / th.lower - 1.0 <= 1e-4);
  CHECK(th.value == th.upper);
  CHECK(zm_sup(p, space, 3, th.lower).value >= c0.c0);
  CHECK(zm_sup(p, space, 3, th.upper).value < c0.c0);
  CHECK_THROWS_AS(lambda_threshold(p, space, 3, c0.c0, {}, 1e3, 1e4), BracketError);
}
