#include <doctest.h>

#include <cmath>
#include <random>

#include "wcs/energy.hpp"

using namespace wcs;

namespace {

constexpr double kPi2 = M_PI * M_PI;

Vec random_vec(std::mt19937_64& rng, Eigen::Index n, double scale) {
  std::normal_distribution<double> d(0.0, 1.0);
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = scale * d(rng) / (1.0 + i);
  return v;
}

}  // namespace

TEST_CASE("system parameters are validated") {
  SystemParams p;
  CHECK_NOTHROW(p.validate());
  p.lambda = -1.0;
  CHECK_THROWS_AS(p.validate(), PreconditionError);
  p = SystemParams{};
  p.beta = 1.0;
  p.p = 3.0;
  CHECK_THROWS_AS(p.validate(), PreconditionError);
  p = SystemParams{};
  p.p = 5.0;
  CHECK_THROWS_AS(p.validate(), PreconditionError);
  p = SystemParams{};
  p.critical = true;
  CHECK_THROWS_AS(p.validate(), PreconditionError);
  p.dim = 4;
  CHECK_NOTHROW(p.validate());
  CHECK(critical_exponent(4) == 4.0);
}

TEST_CASE("bilinear form B_i") {
  auto basis = make_basis(BoxDomain::unit(1), {6});
  const auto e1 = ScalarField::mode(basis, 0);
  SystemParams p;
  CHECK(bilinear_Bi(1, e1, e1, p) == doctest::Approx(kPi2));
  p.kappa1 = kPi2;
  CHECK(std::abs(bilinear_Bi(1, e1, e1, p)) < 1e-12);
  p.kappa2 = 15.0;
  CHECK(bilinear_Bi(2, e1, e1, p) == doctest::Approx(kPi2 - 15.0));
  CHECK(bilinear_Bi(2, e1, e1, p) == doctest::Approx(-5.1304).epsilon(1e-4));
  CHECK_THROWS_AS(bilinear_Bi(3, e1, e1, p), PreconditionError);
}

TEST_CASE("energy examples") {
  auto basis = make_basis(BoxDomain::unit(1), {8});
  auto space = make_space(basis);
  SystemParams p;
  CHECK(energy(PairField::zero(basis), p, space) == 0.0);
  const auto e1 = ScalarField::mode(basis, 0);
  const auto z = ScalarField::zero(basis);
  CHECK(energy(PairField(e1, z), p, space) == doctest::Approx(kPi2 / 2.0 - 1.5 / 4.0).epsilon(1e-12));
  CHECK(energy(PairField(e1, z), p, space) == doctest::Approx(4.55980).epsilon(1e-5));
  CHECK(energy(PairField(e1, e1), p, space) == doctest::Approx(kPi2 - 2.25).epsilon(1e-12));
  CHECK(energy(PairField(e1, e1), p, space) == doctest::Approx(7.61960).epsilon(1e-5));
  CHECK(scalar_energy(e1, 1, p, space) == doctest::Approx(kPi2 / 2.0 - 0.375).epsilon(1e-12));
  CHECK(scalar_energy(z, 2, p, space) == 0.0);
}

TEST_CASE("gradient structure") {
  auto basis = make_basis(BoxDomain::unit(1), {8});
  auto space = make_space(basis);
  SystemParams p;
  const auto g0 = gradient(PairField::zero(basis), p, space);
  CHECK(g0.stacked().cwiseAbs().maxCoeff() == 0.0);
  const auto g = gradient(PairField(ScalarField::mode(basis, 0), ScalarField::zero(basis)), p, space);
  CHECK(g.u2.coeffs.cwiseAbs().maxCoeff() == 0.0);
  CHECK(g.u1.coeffs.cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("property: gradient matches central differences") {
  std::mt19937_64 rng(2024);
  for (auto [dim, alpha, beta, kappa] : std::vector<std::tuple<int, double, double, double>>{
           {1, 2.0, 2.0, 0.0}, {1, 1.5, 2.5, 15.0}, {2, 2.0, 1.6, 3.0}}) {
    SystemParams p;
    p.alpha = alpha;
    p.beta = beta;
    p.p = alpha + beta;
    p.kappa1 = kappa;
    p.kappa2 = 0.5 * kappa;
    p.lambda = 1.3;
    p.dim = dim;
    const auto basis = dim == 1 ? make_basis(BoxDomain::unit(1), {12}) : make_basis(BoxDomain::unit(2), {4, 4});
    const SystemFunctional f(p, make_space(basis));
    for (int trial = 0; trial < 5; ++trial) {
      const Vec x = random_vec(rng, f.dim(), 2.0);
      const Vec h = random_vec(rng, f.dim(), 1.0);
      const double step = 1e-5;
      const double fd = (f.value(x + step * h) - f.value(x - step * h)) / (2.0 * step);
      const double an = f.gradient(x).dot(h);
      CHECK(std::abs(fd - an) <= 1e-5 * std::max(1.0, std::abs(an)));
    }
  }
}

TEST_CASE("property: Hessian matches differences of the gradient") {
  std::mt19937_64 rng(7);
  SystemParams p;
  p.lambda = 2.0;
  const SystemFunctional f(p, make_space(make_basis(BoxDomain::unit(1), {10})));
  for (int trial = 0; trial < 3; ++trial) {
    const Vec x = random_vec(rng, f.dim(), 3.0);
    const Vec h = random_vec(rng, f.dim(), 1.0);
    const double step = 1e-6;
    const Vec fd = (f.gradient(x + step * h) - f.gradient(x - step * h)) / (2.0 * step);
    const Vec an = f.hessian(x) * h;
    CHECK((fd - an).norm() <= 1e-5 * std::max(1.0, an.norm()));
  }
}

TEST_CASE("property: scalar functional gradient matches central differences") {
  std::mt19937_64 rng(5);
  const auto space = make_space(make_basis(BoxDomain::unit(1), {12}));
  const ScalarFunctional f(4.0, 1.5, 3.5, space);
  for (int trial = 0; trial < 5; ++trial) {
    const Vec x = random_vec(rng, f.dim(), 2.0);
    const Vec h = random_vec(rng, f.dim(), 1.0);
    const double step = 1e-5;
    const double fd = (f.value(x + step * h) - f.value(x - step * h)) / (2.0 * step);
    const double an = f.gradient(x).dot(h);
    CHECK(std::abs(fd - an) <= 1e-5 * std::max(1.0, std::abs(an)));
  }
}

TEST_CASE("property: J is even in each component and 2-homogeneous parts scale") {
  std::mt19937_64 rng(9);
  SystemParams p;
  p.alpha = 1.5;
  p.beta = 2.5;
  p.p = 4.0;
  const SystemFunctional f(p, make_space(make_basis(BoxDomain::unit(1), {8})));
  const Vec x = random_vec(rng, f.dim(), 1.0);
  for (int s1 : {-1, 1}) {
    for (int s2 : {-1, 1}) CHECK(f.value(f.sign_image(x, s1, s2)) == doctest::Approx(f.value(x)).epsilon(1e-13));
  }
  const double t = 1.7;
  CHECK(f.quadratic(t * x) == doctest::Approx(t * t * f.quadratic(x)));
  CHECK(f.homogeneous(t * x) == doctest::Approx(std::pow(t, p.p) * f.homogeneous(x)));
}

TEST_CASE("spectral split") {
  const SineBasis b(BoxDomain::unit(1), {6});
  SystemParams p;
  p.kappa1 = 5.0;
  p.kappa2 = kPi2;
  auto s = spectral_split(p, b, 1e-9);
  CHECK(s.component(1).minus.empty());
  CHECK(s.component(1).zero.empty());
  CHECK(s.component(2).zero == std::vector<Eigen::Index>{0});
  CHECK(s.component(2).minus.empty());
  p.kappa2 = 15.0;
  s = spectral_split(p, b, 1e-9);
  CHECK(s.component(2).minus == std::vector<Eigen::Index>{0});
  CHECK(s.component(2).plus.size() == 5);
  CHECK(s.stacked_tilde() == std::vector<Eigen::Index>{6});
  CHECK(s.codim_plus() == 1);
  CHECK_THROWS_AS(split_component(b, 1.0, 0.0), PreconditionError);
}

TEST_CASE("property: split projections are complementary") {
  const auto basis = make_basis(BoxDomain::unit(1), {8});
  SystemParams p;
  p.kappa1 = 45.0;
  p.kappa2 = 15.0;
  const auto s = spectral_split(p, *basis);
  std::mt19937_64 rng(3);
  const auto u = PairField::from_stacked(basis, random_vec(rng, 16, 1.0));
  const auto a = s.project_plus(u);
  const auto b = s.project_tilde(u);
  CHECK((a.stacked() + b.stacked() - u.stacked()).norm() < 1e-15);
  CHECK(std::abs(a.stacked().dot(b.stacked())) < 1e-15);
  CHECK(bilinear_B(b, b, p) <= 0.0);
}
