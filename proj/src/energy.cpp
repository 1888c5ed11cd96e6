#include "wcs/energy.hpp"

#include <algorithm>
#include <cmath>

namespace wcs {

void SystemParams::validate() const {
  auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(kappa1) || !finite(kappa2)) throw PreconditionError("kappa must be finite");
  if (!(mu1 > 0.0) || !(mu2 > 0.0)) throw PreconditionError("mu1, mu2 must be positive");
  if (!(lambda > 0.0) || !finite(lambda)) throw PreconditionError("lambda must be positive");
  if (!(alpha > 1.0) || !(beta > 1.0)) throw PreconditionError("alpha, beta must exceed 1");
  if (std::abs(p - (alpha + beta)) > 1e-12) throw PreconditionError("p must equal alpha + beta");
  if (dim < 1) throw PreconditionError("dimension must be at least 1");
  if (critical) {
    if (dim < 3) throw PreconditionError("critical exponent requires dimension >= 3");
    if (std::abs(p - critical_exponent(dim)) > 1e-12) throw PreconditionError("critical run requires p = 2N/(N-2)");
  } else if (dim >= 3 && p > critical_exponent(dim) + 1e-12) {
    throw PreconditionError("p exceeds the critical Sobolev exponent");
  }
}

double critical_exponent(int dim) {
  if (dim < 3) throw PreconditionError("critical exponent is defined for N >= 3");
  return 2.0 * dim / (dim - 2.0);
}

PairField::PairField(ScalarField a, ScalarField b) : u1(std::move(a)), u2(std::move(b)) {
  if (!same_basis(u1.basis, u2.basis)) throw PreconditionError("PairField: components must share a basis");
}

PairField PairField::zero(const BasisPtr& basis) { return {ScalarField::zero(basis), ScalarField::zero(basis)}; }

PairField PairField::from_stacked(const BasisPtr& basis, const Vec& x) {
  const auto n = basis->size();
  if (x.size() != 2 * n) throw PreconditionError("PairField: stacked vector has wrong length");
  return {ScalarField(basis, x.head(n)), ScalarField(basis, x.tail(n))};
}

Vec PairField::stacked() const {
  Vec x(u1.coeffs.size() + u2.coeffs.size());
  x << u1.coeffs, u2.coeffs;
  return x;
}

std::vector<Eigen::Index> SpectralSplit::Component::tilde() const {
  std::vector<Eigen::Index> t = zero;
  t.insert(t.end(), minus.begin(), minus.end());
  std::sort(t.begin(), t.end());
  return t;
}

std::vector<Eigen::Index> SpectralSplit::stacked_plus() const {
  std::vector<Eigen::Index> s = component(1).plus;
  for (auto k : component(2).plus) s.push_back(k + modes);
  return s;
}

std::vector<Eigen::Index> SpectralSplit::stacked_tilde() const {
  std::vector<Eigen::Index> s = component(1).tilde();
  for (auto k : component(2).tilde()) s.push_back(k + modes);
  return s;
}

namespace {

ScalarField keep(const ScalarField& f, const std::vector<Eigen::Index>& indices) {
  Vec c = Vec::Zero(f.coeffs.size());
  for (auto k : indices) c[k] = f.coeffs[k];
  return {f.basis, std::move(c)};
}

}  // namespace

PairField SpectralSplit::project_plus(const PairField& u) const {
  return {keep(u.u1, component(1).plus), keep(u.u2, component(2).plus)};
}

PairField SpectralSplit::project_tilde(const PairField& u) const {
  return {keep(u.u1, component(1).tilde()), keep(u.u2, component(2).tilde())};
}

SpectralSplit::Component split_component(const SineBasis& basis, double kappa, double tol) {
  if (!(tol > 0.0)) throw PreconditionError("spectral_split: tolerance must be positive");
  SpectralSplit::Component c;
  const Vec& g = basis.eigenvalues();
  for (Eigen::Index k = 0; k < g.size(); ++k) {
    const double d = g[k] - kappa;
    if (std::abs(d) <= tol) {
      c.zero.push_back(k);
    } else if (d > tol) {
      c.plus.push_back(k);
    } else {
      c.minus.push_back(k);
    }
  }
  return c;
}

double default_split_tolerance(const SineBasis& basis) { return 1e-9 * basis.eigenvalues()[0]; }

SpectralSplit spectral_split(const SystemParams& params, const SineBasis& basis, double tol) {
  SpectralSplit s;
  s.tolerance = tol;
  s.modes = basis.size();
  s.components[0] = split_component(basis, params.kappa1, tol);
  s.components[1] = split_component(basis, params.kappa2, tol);
  return s;
}

double bilinear_Bi(int component, const ScalarField& f, const ScalarField& g, const SystemParams& params) {
  if (!same_basis(f.basis, g.basis)) throw PreconditionError("bilinear_Bi: fields live on different bases");
  if (component != 1 && component != 2) throw PreconditionError("bilinear_Bi: component must be 1 or 2");
  const double kappa = params.kappa(component);
  return ((f.basis->eigenvalues().array() - kappa) * f.coeffs.array() * g.coeffs.array()).sum();
}

double bilinear_B(const PairField& u, const PairField& v, const SystemParams& params) {
  return bilinear_Bi(1, u.u1, v.u1, params) + bilinear_Bi(2, u.u2, v.u2, params);
}

double pow_abs(double x, double q) {
  if (q == 0.0) return 1.0;
  if (x == 0.0) return 0.0;
  const double a = std::abs(x);
  if (q == 1.0) return a;
  if (q == 2.0) return a * a;
  if (q == 3.0) return a * a * a;
  if (q == 4.0) return (a * a) * (a * a);
  return std::pow(a, q);
}

double signed_pow(double x, double q) {
  if (x == 0.0) return 0.0;
  return x > 0.0 ? pow_abs(x, q) : -pow_abs(x, q);
}

namespace {

Vec map(const Vec& v, auto&& f) {
  Vec r(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) r[i] = f(v[i]);
  return r;
}

void check_space(const BasisPtr& basis, const GalerkinSpace& space) {
  if (!same_basis(basis, space.basis_ptr())) throw PreconditionError("field basis differs from the Galerkin space basis");
}

}  // namespace

SystemFunctional::SystemFunctional(SystemParams params, SpacePtr space,
                                   std::optional<double> split_tol)
    : params_(params), space_(std::move(space)) {
  params_.validate();
  const auto& basis = space_->basis();
  if (basis.dim() != params_.dim) throw PreconditionError("SystemParams dimension differs from the domain dimension");
  split_ = spectral_split(params_, basis, split_tol.value_or(default_split_tolerance(basis)));
  const auto n = basis.size();
  stiffness_.resize(2 * n);
  stiffness_ << basis.eigenvalues(), basis.eigenvalues();
  shifted_.resize(2 * n);
  shifted_ << basis.eigenvalues().array() - params_.kappa1, basis.eigenvalues().array() - params_.kappa2;
  plus_ = split_.stacked_plus();
  tilde_ = split_.stacked_tilde();
}

Masses SystemFunctional::masses(const Vec& x) const {
  const auto n = space_->modes();
  const Vec u1 = space_->synthesize(x.head(n));
  const Vec u2 = space_->synthesize(x.tail(n));
  const double p = params_.p;
  Masses m;
  m.power1 = space_->integrate(map(u1, [p](double v) { return pow_abs(v, p); }));
  m.power2 = space_->integrate(map(u2, [p](double v) { return pow_abs(v, p); }));
  Vec c(u1.size());
  for (Eigen::Index q = 0; q < c.size(); ++q) c[q] = pow_abs(u1[q], params_.alpha) * pow_abs(u2[q], params_.beta);
  m.coupling = space_->integrate(c);
  return m;
}

double SystemFunctional::homogeneous(const Vec& x) const {
  const Masses m = masses(x);
  return params_.mu1 * m.power1 + params_.mu2 * m.power2 + params_.p * params_.lambda * m.coupling;
}

double SystemFunctional::value(const Vec& x) const { return 0.5 * quadratic(x) - homogeneous(x) / params_.p; }

Vec SystemFunctional::gradient(const Vec& x) const {
  const auto n = space_->modes();
  const Vec u1 = space_->synthesize(x.head(n));
  const Vec u2 = space_->synthesize(x.tail(n));
  const auto& s = params_;
  Vec n1(u1.size());
  Vec n2(u1.size());
  for (Eigen::Index q = 0; q < u1.size(); ++q) {
    const double a = u1[q];
    const double b = u2[q];
    n1[q] = s.mu1 * signed_pow(a, s.p - 1.0) + s.lambda * s.alpha * signed_pow(a, s.alpha - 1.0) * pow_abs(b, s.beta);
    n2[q] = s.mu2 * signed_pow(b, s.p - 1.0) + s.lambda * s.beta * pow_abs(a, s.alpha) * signed_pow(b, s.beta - 1.0);
  }
  Vec g = shifted_.cwiseProduct(x);
  g.head(n) -= space_->project(n1);
  g.tail(n) -= space_->project(n2);
  return g;
}

Mat SystemFunctional::hessian(const Vec& x) const {
  const auto n = space_->modes();
  const Vec u1 = space_->synthesize(x.head(n));
  const Vec u2 = space_->synthesize(x.tail(n));
  const auto& s = params_;
  Vec d11(u1.size());
  Vec d22(u1.size());
  Vec d12(u1.size());
  for (Eigen::Index q = 0; q < u1.size(); ++q) {
    const double a = u1[q];
    const double b = u2[q];
    d11[q] = s.mu1 * (s.p - 1.0) * pow_abs(a, s.p - 2.0) +
             s.lambda * s.alpha * (s.alpha - 1.0) * pow_abs(a, s.alpha - 2.0) * pow_abs(b, s.beta);
    d22[q] = s.mu2 * (s.p - 1.0) * pow_abs(b, s.p - 2.0) +
             s.lambda * s.beta * (s.beta - 1.0) * pow_abs(a, s.alpha) * pow_abs(b, s.beta - 2.0);
    d12[q] = s.lambda * s.alpha * s.beta * signed_pow(a, s.alpha - 1.0) * signed_pow(b, s.beta - 1.0);
  }
  Mat h = Mat::Zero(2 * n, 2 * n);
  h.diagonal() = shifted_;
  h.topLeftCorner(n, n) -= space_->weighted_gram(d11);
  h.bottomRightCorner(n, n) -= space_->weighted_gram(d22);
  const Mat off = space_->weighted_gram(d12);
  h.topRightCorner(n, n) -= off;
  h.bottomLeftCorner(n, n) -= off;
  return h;
}

Vec SystemFunctional::sign_image(const Vec& x, int s1, int s2) const {
  const auto n = space_->modes();
  Vec y(x.size());
  y.head(n) = static_cast<double>(s1) * x.head(n);
  y.tail(n) = static_cast<double>(s2) * x.tail(n);
  return y;
}

ScalarFunctional::ScalarFunctional(double kappa, double mu, double p, SpacePtr space,
                                   std::optional<double> split_tol)
    : kappa_(kappa), mu_(mu), p_(p), space_(std::move(space)) {
  if (!(mu_ > 0.0)) throw PreconditionError("ScalarFunctional: mu must be positive");
  if (!(p_ > 2.0)) throw PreconditionError("ScalarFunctional: p must exceed 2");
  const auto& basis = space_->basis();
  split_ = split_component(basis, kappa_, split_tol.value_or(default_split_tolerance(basis)));
  tilde_ = split_.tilde();
  shifted_ = basis.eigenvalues().array() - kappa_;
}

ScalarFunctional ScalarFunctional::for_component(const SystemParams& params, int component,
                                                 SpacePtr space,
                                                 std::optional<double> split_tol) {
  return ScalarFunctional(params.kappa(component), params.mu(component), params.p, std::move(space), split_tol);
}

double ScalarFunctional::homogeneous(const Vec& x) const {
  const Vec u = space_->synthesize(x);
  const double p = p_;
  return mu_ * space_->integrate(map(u, [p](double v) { return pow_abs(v, p); }));
}

double ScalarFunctional::value(const Vec& x) const { return 0.5 * quadratic(x) - homogeneous(x) / p_; }

Vec ScalarFunctional::gradient(const Vec& x) const {
  const Vec u = space_->synthesize(x);
  const double p = p_;
  const double mu = mu_;
  return shifted_.cwiseProduct(x) - space_->project(map(u, [p, mu](double v) { return mu * signed_pow(v, p - 1.0); }));
}

Mat ScalarFunctional::hessian(const Vec& x) const {
  const Vec u = space_->synthesize(x);
  const double p = p_;
  const double mu = mu_;
  Mat h = -space_->weighted_gram(map(u, [p, mu](double v) { return mu * (p - 1.0) * pow_abs(v, p - 2.0); }));
  h.diagonal() += shifted_;
  return h;
}

double energy(const PairField& u, const SystemParams& params, const SpacePtr& space) {
  check_space(u.basis(), *space);
  SystemFunctional f(params, space);
  return f.value(u.stacked());
}

PairField gradient(const PairField& u, const SystemParams& params, const SpacePtr& space) {
  check_space(u.basis(), *space);
  SystemFunctional f(params, space);
  return PairField::from_stacked(u.basis(), f.gradient(u.stacked()));
}

double scalar_energy(const ScalarField& w, int component, const SystemParams& params, const SpacePtr& space) {
  check_space(w.basis, *space);
  auto f = ScalarFunctional::for_component(params, component, space);
  return f.value(w.coeffs);
}

ScalarField scalar_gradient(const ScalarField& w, int component, const SystemParams& params,
                            const SpacePtr& space) {
  check_space(w.basis, *space);
  auto f = ScalarFunctional::for_component(params, component, space);
  return {w.basis, f.gradient(w.coeffs)};
}

}  // namespace wcs
