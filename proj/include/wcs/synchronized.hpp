#pragma once

#include <vector>

#include "wcs/energy.hpp"
#include "wcs/nehari.hpp"

namespace wcs {

/// h(r) = mu1 r^{p-2} + lambda alpha r^{alpha-2} - lambda beta r^alpha - mu2.
double sync_h(double r, const SystemParams& params);

/// h > 0 near r = 0: alpha < 2, or alpha = 2 and lambda > mu2/2.
bool sync_small_r_positive(const SystemParams& params);
/// h < 0 for large r: beta < 2, or beta = 2 and lambda > mu1/2.
bool sync_large_r_negative(const SystemParams& params);

struct RootSearch {
  std::vector<double> roots;
  /// Both sufficient conditions hold, so a sign change (hence a root) must exist.
  bool guaranteed = false;
};

/// Simple roots of h in [r_lo, r_hi]: sign changes on a log grid refined by bisection to full
/// double precision.
RootSearch find_roots(const SystemParams& params, double r_lo = 1e-8, double r_hi = 1e8, int points = 4001);

struct SyncRoot {
  double r = 0.0;
  double s = 0.0;
  double t = 0.0;
  double h_residual = 0.0;
};

/// t = (mu2 + lambda beta r^alpha)^{-1/(p-2)}, s = r t. Throws PreconditionError when r is not a
/// root of h within 1e-10 (scaled by the size of the terms).
SyncRoot amplitudes(double r, const SystemParams& params);

/// Residuals of mu1 s^{p-2} + lambda alpha s^{alpha-2} t^beta = 1 and mu2 t^{p-2} + lambda beta s^alpha t^{beta-2} = 1.
std::pair<double, double> euler_identities(const SyncRoot& root, const SystemParams& params);

/// Rescales a solution of -Lap w - kappa w = mu_w |w|^{p-2} w to the unit-coefficient equation.
ScalarField unit_normalize(const ScalarField& w, double mu_w, double p);

struct SyncSolution {
  CriticalPoint point;
  /// Gradient norm of the unit-coefficient scalar functional at w.
  double scalar_residual = 0.0;
  /// Gradient norm of J_lambda at (s w, t w).
  double system_residual = 0.0;
};

/// Assembles (s w, t w). Requires kappa1 = kappa2; w should solve the unit-coefficient scalar equation.
SyncSolution synchronized_solution(const ScalarField& w, const SyncRoot& root, const SystemFunctional& f);

}  // namespace wcs
