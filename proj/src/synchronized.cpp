#include "wcs/synchronized.hpp"

#include <cmath>
#include <sstream>

namespace wcs {

double sync_h(double r, const SystemParams& params) {
  if (!(r > 0.0)) throw PreconditionError("h: r must be positive");
  const auto& q = params;
  return q.mu1 * std::pow(r, q.p - 2.0) + q.lambda * q.alpha * std::pow(r, q.alpha - 2.0) -
         q.lambda * q.beta * std::pow(r, q.alpha) - q.mu2;
}

namespace {

double h_scale(double r, const SystemParams& q) {
  return q.mu1 * std::pow(r, q.p - 2.0) + q.lambda * q.alpha * std::pow(r, q.alpha - 2.0) +
         q.lambda * q.beta * std::pow(r, q.alpha) + q.mu2;
}

}  // namespace

bool sync_small_r_positive(const SystemParams& q) {
  return q.alpha < 2.0 || (q.alpha == 2.0 && q.lambda > 0.5 * q.mu2);
}

bool sync_large_r_negative(const SystemParams& q) {
  return q.beta < 2.0 || (q.beta == 2.0 && q.lambda > 0.5 * q.mu1);
}

RootSearch find_roots(const SystemParams& params, double r_lo, double r_hi, int points) {
  if (!(r_lo > 0.0) || !(r_hi > r_lo) || points < 2) throw PreconditionError("find_roots: bad range");
  RootSearch out;
  out.guaranteed = sync_small_r_positive(params) && sync_large_r_negative(params);
  const double a = std::log(r_lo);
  const double step = (std::log(r_hi) - a) / (points - 1);
  auto grid = [&](int i) { return i == points - 1 ? r_hi : std::exp(a + step * i); };
  double x0 = grid(0);
  double h0 = sync_h(x0, params);
  if (h0 == 0.0) out.roots.push_back(x0);
  for (int i = 1; i < points; ++i) {
    const double x1 = grid(i);
    const double h1 = sync_h(x1, params);
    if (h1 == 0.0) {
      if (h0 != 0.0) out.roots.push_back(x1);
    } else if (h0 != 0.0 && (h0 < 0.0) != (h1 < 0.0)) {
      double lo = x0;
      double hi = x1;
      const bool lo_negative = h0 < 0.0;
      for (int k = 0; k < 200; ++k) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double hm = sync_h(mid, params);
        if (hm == 0.0) {
          lo = hi = mid;
          break;
        }
        ((hm < 0.0) == lo_negative ? lo : hi) = mid;
      }
      const double hl = std::abs(sync_h(lo, params));
      const double hh = std::abs(sync_h(hi, params));
      out.roots.push_back(hl <= hh ? lo : hi);
    }
    x0 = x1;
    h0 = h1;
  }
  return out;
}

SyncRoot amplitudes(double r, const SystemParams& params) {
  const auto& q = params;
  SyncRoot root;
  root.r = r;
  root.h_residual = sync_h(r, q);
  if (!(std::abs(root.h_residual) <= 1e-10 * h_scale(r, q))) {
    std::ostringstream msg;
    msg << "amplitudes: r = " << r << " is not a root of h (residual " << root.h_residual << ")";
    throw PreconditionError(msg.str());
  }
  root.t = std::pow(q.mu2 + q.lambda * q.beta * std::pow(r, q.alpha), -1.0 / (q.p - 2.0));
  root.s = r * root.t;
  return root;
}

std::pair<double, double> euler_identities(const SyncRoot& root, const SystemParams& q) {
  const double s = root.s;
  const double t = root.t;
  const double e1 = q.mu1 * std::pow(s, q.p - 2.0) + q.lambda * q.alpha * std::pow(s, q.alpha - 2.0) * std::pow(t, q.beta);
  const double e2 = q.mu2 * std::pow(t, q.p - 2.0) + q.lambda * q.beta * std::pow(s, q.alpha) * std::pow(t, q.beta - 2.0);
  return {e1 - 1.0, e2 - 1.0};
}

ScalarField unit_normalize(const ScalarField& w, double mu_w, double p) {
  if (!(mu_w > 0.0)) throw PreconditionError("unit_normalize: coefficient must be positive");
  return ScalarField(w.basis, std::pow(mu_w, 1.0 / (p - 2.0)) * w.coeffs);
}

SyncSolution synchronized_solution(const ScalarField& w, const SyncRoot& root, const SystemFunctional& f) {
  const auto& q = f.params();
  if (q.kappa1 != q.kappa2) throw PreconditionError("synchronized_solution: requires kappa1 = kappa2");
  if (!same_basis(w.basis, f.space().basis_ptr())) throw PreconditionError("synchronized_solution: basis mismatch");
  if (!(root.s > 0.0 && root.t > 0.0)) throw PreconditionError("synchronized_solution: amplitudes must be positive");
  const auto n = f.space().modes();
  const ScalarFunctional unit(q.kappa1, 1.0, q.p, f.space_ptr());
  SyncSolution out;
  out.scalar_residual = unit.gradient(w.coeffs).norm();
  Vec x(2 * n);
  x << root.s * w.coeffs, root.t * w.coeffs;
  out.point = make_critical_point(f, x);
  out.system_residual = out.point.gradient_norm;
  return out;
}

}  // namespace wcs
