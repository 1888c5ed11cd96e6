#include "wcs/limit_system.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "wcs/optim.hpp"
#include "wcs/radial.hpp"
#include "wcs/spectral_domain.hpp"

namespace wcs {

void LimitParams::validate() const {
  if (dim < 3) throw PreconditionError("limit system: dimension must be at least 3");
  if (!(mu1 > 0.0) || !(mu2 > 0.0)) throw PreconditionError("limit system: mu1, mu2 must be positive");
  if (!(lambda > 0.0)) throw PreconditionError("limit system: lambda must be positive");
  if (!(alpha > 1.0) || !(beta > 1.0)) throw PreconditionError("limit system: alpha, beta must exceed 1");
  if (std::abs(alpha + beta - critical()) > 1e-12) {
    throw PreconditionError("limit system: alpha + beta must equal 2N/(N-2)");
  }
}

double LimitParams::critical() const { return 2.0 * dim / (dim - 2.0); }

double f_lambda(double r, const LimitParams& lp) {
  const double q = lp.critical();
  const double den = lp.mu1 * std::pow(r, q) + lp.mu2 + q * lp.lambda * std::pow(r, lp.alpha);
  return (r * r + 1.0) / std::pow(den, 2.0 / q);
}

double f_lambda_bound(const LimitParams& lp) { return std::pow(std::max(lp.mu1, lp.mu2), -2.0 / lp.critical()); }

namespace {

constexpr double kRmin = 1e-6;
constexpr double kRmax = 1e6;

LogScanMin scan(const LimitParams& lp) {
  return log_scan_min([&lp](double r) { return f_lambda(r, lp); }, kRmin, kRmax);
}

bool below_bound(const LimitParams& lp) { return f_lambda_inf(lp) < f_lambda_bound(lp) - 1e-12; }

}  // namespace

double f_lambda_inf(const LimitParams& lp) { return scan(lp).value; }

SInfty S_infty(const LimitParams& lp, double S) {
  lp.validate();
  if (!(S > 0.0)) throw PreconditionError("S_infty: S must be positive");
  const auto m = scan(lp);
  if (m.at_boundary || !(m.value < f_lambda_bound(lp) - 1e-12)) {
    std::ostringstream msg;
    msg << "S_infty: infimum of f_lambda is approached at the boundary (lambda = " << lp.lambda
        << " is not above the threshold)";
    throw BoundaryInfimumError(msg.str());
  }
  return {m.value * S, m.x, m.value};
}

double S_infty_grid(const LimitParams& lp, double S, int points) {
  lp.validate();
  const double q = lp.critical();
  const double lo = std::log(1e-3);
  const double h = (std::log(1e3) - lo) / (points - 1);
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < points; ++i) {
    const double s = std::exp(lo + h * i);
    for (int j = 0; j < points; ++j) {
      const double t = std::exp(lo + h * j);
      const double den = lp.mu1 * std::pow(s, q) + lp.mu2 * std::pow(t, q) +
                         q * lp.lambda * std::pow(s, lp.alpha) * std::pow(t, lp.beta);
      best = std::min(best, (s * s + t * t) / std::pow(den, 2.0 / q));
    }
  }
  return best * S;
}

double lambda0_threshold(const LimitParams& lp) {
  LimitParams q = lp.with_lambda(1.0);
  q.validate();
  double hi = 1.0;
  double lo = 0.0;
  if (below_bound(q)) {
    lo = hi;
    while (below_bound(q.with_lambda(lo))) {
      hi = lo;
      lo *= 0.5;
      if (lo < 1e-12) return 0.0;
    }
  } else {
    lo = hi;
    while (!below_bound(q.with_lambda(hi))) {
      lo = hi;
      hi *= 2.0;
      if (hi > 1e12) throw InconsistencyError("lambda0_threshold: condition never holds");
    }
  }
  while (hi / lo - 1.0 > 1e-6) {
    const double mid = std::sqrt(lo * hi);
    (below_bound(q.with_lambda(mid)) ? hi : lo) = mid;
  }
  return hi;
}

double bubble_value(int dim, double eps, double r) {
  if (dim < 3 || !(eps > 0.0) || !(r >= 0.0)) throw PreconditionError("bubble_value: bad arguments");
  const double n = dim;
  return std::pow(n * (n - 2.0), (n - 2.0) / 4.0) * std::pow(eps / (eps * eps + r * r), (n - 2.0) / 2.0);
}

double bubble_derivative(int dim, double eps, double r) {
  return -(dim - 2.0) * r * bubble_value(dim, eps, r) / (eps * eps + r * r);
}

SobolevConstant sobolev_constant(int dim, double eps) {
  if (dim < 3) throw PreconditionError("sobolev_constant: dimension must be at least 3");
  const double q = 2.0 * dim / (dim - 2.0);
  SobolevConstant s;
  s.gradient_norm2 = integrate_shell(
                         [&](double r) {
                           const double d = bubble_derivative(dim, eps, r);
                           return d * d;
                         },
                         dim, 0.0, kInfinity, eps)
                         .value;
  s.power_integral =
      integrate_shell([&](double r) { return std::pow(bubble_value(dim, eps, r), q); }, dim, 0.0, kInfinity, eps).value;
  const double gap = std::abs(s.gradient_norm2 - s.power_integral) / s.gradient_norm2;
  if (!(gap <= 1e-8)) {
    std::ostringstream msg;
    msg << "sobolev_constant: int |grad U|^2 = " << s.gradient_norm2 << " and int U^{2*} = " << s.power_integral
        << " differ by " << gap << " relative";
    throw InconsistencyError(msg.str());
  }
  s.value = std::pow(s.gradient_norm2, 2.0 / dim);
  return s;
}

Amplitudes minimizer_amplitudes(const LimitParams& lp, double S, double r_lambda) {
  lp.validate();
  if (!(r_lambda > 0.0)) throw PreconditionError("minimizer_amplitudes: r_lambda must be positive");
  const double q = lp.critical();
  const int n = lp.dim;
  const auto sc = sobolev_constant(n);
  const double a = sc.gradient_norm2;
  const double c = sc.power_integral;
  const double r = r_lambda;
  const double den = lp.mu1 * std::pow(r, q) + lp.mu2 + q * lp.lambda * std::pow(r, lp.alpha);
  Amplitudes out;
  out.t = std::pow((r * r + 1.0) * a / (den * c), 1.0 / (q - 2.0));
  out.s = r * out.t;
  const double s = out.s;
  const double t = out.t;
  const double quad = (s * s + t * t) * a;
  const double nonlin =
      (lp.mu1 * std::pow(s, q) + lp.mu2 * std::pow(t, q) + q * lp.lambda * std::pow(s, lp.alpha) * std::pow(t, lp.beta)) * c;
  out.energy = 0.5 * quad - nonlin / q;
  out.ray_residual = quad - nonlin;
  out.expected_energy = std::pow(f_lambda(r, lp) * S, 0.5 * n) / n;
  const double rel = std::abs(out.energy - out.expected_energy) / out.expected_energy;
  if (!(rel <= 1e-6)) {
    std::ostringstream msg;
    msg << "minimizer_amplitudes: energy " << out.energy << " differs from S_infty^{N/2}/N = " << out.expected_energy
        << " by " << rel << " relative";
    throw InconsistencyError(msg.str());
  }
  return out;
}

}  // namespace wcs
