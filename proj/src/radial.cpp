#include "wcs/radial.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace wcs {

namespace {

constexpr unsigned kMaxDepth = 18;
constexpr double kRelTol = 1e-13;
constexpr int kPanelsAbove = 24;

Integral gk_panel(const std::function<double(double)>& f, double a, double b) {
  Integral r;
  r.value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 0, 0.0, &r.error);
  return r;
}

/// Bisects until the panel error is below max(kRelTol |value|, floor), or until halving stops
/// reducing the estimate (the Kronrod estimate has a round-off floor of a few hundred ulps).
Integral refine(const std::function<double(double)>& f, double a, double b, const Integral& coarse, double floor,
                unsigned depth) {
  if (depth >= kMaxDepth || coarse.error <= std::max(kRelTol * std::abs(coarse.value), floor)) return coarse;
  const double m = 0.5 * (a + b);
  const auto l = gk_panel(f, a, m);
  const auto r = gk_panel(f, m, b);
  if (l.error + r.error >= 0.5 * coarse.error) return {l.value + r.value, l.error + r.error};
  const auto left = refine(f, a, m, l, 0.5 * floor, depth + 1);
  const auto right = refine(f, m, b, r, 0.5 * floor, depth + 1);
  return {left.value + right.value, left.error + right.error};
}

/// Adaptive sum over consecutive panels. The absolute floor is relative to the coarse total, so
/// panels carrying a negligible share of the integral are not refined to full relative accuracy.
Integral integrate_panels(const std::function<double(double)>& f, const std::vector<double>& pts) {
  std::vector<Integral> coarse;
  double l1 = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    coarse.push_back(gk_panel(f, pts[i], pts[i + 1]));
    l1 += std::abs(coarse.back().value);
  }
  const double floor = 1e-16 * l1;
  Integral total;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const auto piece = refine(f, pts[i], pts[i + 1], coarse[i], floor, 0);
    total.value += piece.value;
    total.error += piece.error;
  }
  return total;
}

}  // namespace

double sphere_area(int dim) {
  if (dim < 1) throw std::invalid_argument("sphere_area: dimension must be positive");
  const double h = 0.5 * dim;
  return 2.0 * std::pow(M_PI, h) / boost::math::tgamma(h);
}

Integral integrate_radial(const std::function<double(double)>& f, double a, double b, double scale,
                          const std::vector<double>& breaks) {
  if (!(a >= 0.0) || !(b > a) || !(scale > 0.0)) throw std::invalid_argument("integrate_radial: bad interval");
  const double top = std::isfinite(b) ? b : std::max(a, scale) * std::ldexp(1.0, kPanelsAbove);
  std::vector<double> pts{a};
  for (int k = -40; k <= 64; ++k) {
    const double x = scale * std::ldexp(1.0, k);
    if (x > a && x < top) pts.push_back(x);
  }
  for (double x : breaks) {
    if (x > a && x < top) pts.push_back(x);
  }
  pts.push_back(top);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  Integral total = integrate_panels(f, pts);
  if (!std::isfinite(b)) {
    const double r0 = top;
    auto mapped = [&](double x) { return x > 0.0 ? f(r0 / x) * r0 / (x * x) : 0.0; };
    const auto tail = integrate_panels(mapped, {0.0, 0.5, 1.0});
    total.value += tail.value;
    total.error += tail.error;
  }
  return total;
}

Integral integrate_shell(const std::function<double(double)>& g, int dim, double a, double b, double scale,
                         const std::vector<double>& breaks) {
  const double area = sphere_area(dim);
  auto integrand = [&](double r) { return g(r) * std::pow(r, dim - 1); };
  Integral r = integrate_radial(integrand, a, b, scale, breaks);
  r.value *= area;
  r.error *= area;
  return r;
}

}  // namespace wcs
