#include <doctest.h>

#include <cmath>
#include <random>

#include "wcs/spectral_domain.hpp"

using namespace wcs;

namespace {

constexpr double kPi2 = M_PI * M_PI;

/// Composite trapezoid on (0,1) as an independent oracle.
double trapezoid(const std::function<double(double)>& f, int n) {
  double s = 0.5 * (f(0.0) + f(1.0));
  for (int i = 1; i < n; ++i) s += f(static_cast<double>(i) / n);
  return s / n;
}

}  // namespace

TEST_CASE("eigenvalues of the sine basis") {
  const SineBasis b1(BoxDomain::unit(1), {8});
  CHECK(eigenvalue(b1, 0) == doctest::Approx(kPi2).epsilon(1e-14));
  const SineBasis b2(BoxDomain::unit(2), {4, 4});
  CHECK(b2.mode(0) == MultiIndex{1, 1});
  CHECK(eigenvalue(b2, 0) == doctest::Approx(2.0 * kPi2).epsilon(1e-14));
  const SineBasis b3(BoxDomain({1.0, 2.0}), {4, 4});
  CHECK(b3.mode(0) == MultiIndex{1, 1});
  CHECK(eigenvalue(b3, 0) == doctest::Approx(kPi2 * 1.25).epsilon(1e-14));
  CHECK(eigenvalue(b3, 0) == doctest::Approx(12.3370055).epsilon(1e-8));
}

TEST_CASE("modes are sorted by eigenvalue") {
  const SineBasis b(BoxDomain({1.0, 1.7, 0.6}), {5, 4, 3});
  CHECK(b.size() == 60);
  for (Eigen::Index i = 1; i < b.size(); ++i) CHECK(b.eigenvalues()[i] >= b.eigenvalues()[i - 1]);
}

TEST_CASE("mode index out of range is a precondition error") {
  const SineBasis b(BoxDomain::unit(1), {4});
  CHECK_THROWS_AS(b.mode(4), PreconditionError);
  CHECK_THROWS_AS(eigenvalue(b, -1), PreconditionError);
  CHECK_THROWS_AS(SineBasis(BoxDomain::unit(2), {3}), PreconditionError);
  CHECK_THROWS_AS(BoxDomain({1.0, -1.0}), PreconditionError);
}

TEST_CASE("synthesize is linear and reproduces modes") {
  auto basis = make_basis(BoxDomain::unit(2), {3, 3});
  const auto grid = QuadratureGrid::for_basis(*basis);
  CHECK(synthesize(ScalarField::zero(basis), grid).cwiseAbs().maxCoeff() == 0.0);
  const Vec e0 = synthesize(ScalarField::mode(basis, 0), grid);
  const Vec e1 = synthesize(ScalarField::mode(basis, 1), grid);
  for (Eigen::Index n = 0; n < grid.size(); n += 37) {
    CHECK(e0[n] == doctest::Approx(basis->evaluate(0, grid.point(n))).epsilon(1e-13));
  }
  Vec c = Vec::Zero(basis->size());
  c[0] = 1.0;
  c[1] = 1.0;
  CHECK((synthesize(ScalarField(basis, c), grid) - e0 - e1).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("integrate matches normalisation integrals") {
  const QuadratureGrid sq(BoxDomain::unit(2), {16, 16});
  CHECK(integrate(Vec::Ones(sq.size()), sq) == doctest::Approx(1.0).epsilon(1e-12));

  auto basis = make_basis(BoxDomain::unit(1), {8});
  const auto grid = QuadratureGrid::for_basis(*basis);
  const Vec e = synthesize(ScalarField::mode(basis, 0), grid);
  CHECK(integrate(e.array().square().matrix(), grid) == doctest::Approx(1.0).epsilon(1e-10));
  const double quartic = integrate(e.array().pow(4).matrix(), grid);
  CHECK(quartic == doctest::Approx(1.5).epsilon(1e-10));
  const double oracle = trapezoid([](double x) { return std::pow(std::sqrt(2.0) * std::sin(M_PI * x), 4); }, 4000);
  CHECK(quartic == doctest::Approx(oracle).epsilon(1e-10));
}

TEST_CASE("h1_inner") {
  auto basis = make_basis(BoxDomain::unit(1), {6});
  CHECK(h1_inner(ScalarField::mode(basis, 0), ScalarField::mode(basis, 0)) == doctest::Approx(kPi2));
  CHECK(h1_inner(ScalarField::mode(basis, 0), ScalarField::mode(basis, 3)) == 0.0);
  Vec c = Vec::Zero(6);
  c[0] = c[1] = 1.0;
  const ScalarField f(basis, c);
  CHECK(h1_inner(f, f) == doctest::Approx(5.0 * kPi2));
  auto other = make_basis(BoxDomain::unit(1), {7});
  CHECK_THROWS_AS(h1_inner(f, ScalarField::mode(other, 0)), PreconditionError);
}

TEST_CASE("property: Gram matrix of the discrete basis is the identity") {
  for (const auto& [lengths, cuts] : std::vector<std::pair<std::vector<double>, std::vector<int>>>{
           {{1.0}, {50}}, {{1.0, 1.0}, {8, 8}}, {{1.3, 0.7}, {6, 9}}, {{1.0, 2.0, 0.5}, {3, 4, 3}}}) {
    const auto space = make_space(make_basis(BoxDomain(lengths), cuts));
    const Mat g = space->weighted_gram(Vec::Ones(space->nodes()));
    CHECK((g - Mat::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("property: quadrature is exact for products of basis functions") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0.0, 1.0);
  const auto space = make_space(make_basis(BoxDomain({1.0, 1.5}), {5, 5}));
  for (int trial = 0; trial < 5; ++trial) {
    Vec a(space->modes());
    Vec b(space->modes());
    for (Eigen::Index k = 0; k < a.size(); ++k) {
      a[k] = n(rng);
      b[k] = n(rng);
    }
    const double l2 = space->integrate(space->synthesize(a).cwiseProduct(space->synthesize(b)));
    CHECK(l2 == doctest::Approx(a.dot(b)).epsilon(1e-11));
  }
}

TEST_CASE("quadrature grid shape and panel rounding") {
  const QuadratureGrid g(BoxDomain({1.0, 2.0}), {10, 100}, 48);
  CHECK(g.shape()[0] == 10);
  // 100 nodes need 3 panels of 34 points.
  CHECK(g.shape()[1] == 102);
  double w = 0.0;
  for (double x : g.weights(1)) w += x;
  CHECK(w == doctest::Approx(2.0).epsilon(1e-13));
  CHECK_THROWS_AS(integrate(Vec::Ones(3), g), PreconditionError);
}
