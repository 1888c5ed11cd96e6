#pragma once

#include <stdexcept>

namespace wcs {

/// Coefficients of the limit system on R^N with critical coupling alpha + beta = 2N/(N-2).
struct LimitParams {
  double mu1 = 1.0;
  double mu2 = 1.0;
  double lambda = 1.0;
  double alpha = 2.0;
  double beta = 2.0;
  int dim = 4;

  void validate() const;
  double critical() const;
  LimitParams with_lambda(double l) const {
    LimitParams q = *this;
    q.lambda = l;
    return q;
  }
};

/// The infimum of f_lambda is approached at r -> 0 or r -> infinity instead of attained inside.
class BoundaryInfimumError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A derived identity failed beyond its tolerance.
class InconsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// f(r) = (r^2 + 1) / (mu1 r^{2*} + mu2 + 2* lambda r^alpha)^{2/2*}, r >= 0.
double f_lambda(double r, const LimitParams& lp);

struct SInfty {
  double value = 0.0;
  double r_lambda = 0.0;
  double f_min = 0.0;
};

/// S_{infty,lambda} = S inf_{r>0} f_lambda(r), by a log-grid scan on [1e-6, 1e6] refined by
/// golden section. Throws BoundaryInfimumError when the minimum is not attained at an interior
/// point strictly below min{mu1^{-2/2*}, mu2^{-2/2*}}.
SInfty S_infty(const LimitParams& lp, double S);

/// Brute-force inf of (s^2+t^2) S / (mu1 s^{2*} + mu2 t^{2*} + 2* lambda s^alpha t^beta)^{2/2*}
/// over a `points` x `points` log grid of (s,t) in [1e-3, 1e3]^2.
double S_infty_grid(const LimitParams& lp, double S, int points = 401);

/// min{mu1^{-2/2*}, mu2^{-2/2*}}.
double f_lambda_bound(const LimitParams& lp);

/// Smallest lambda (bracket 1e-6 relative) with inf_r f_lambda(r) below f_lambda_bound - 1e-12.
/// The lambda field of `lp` is ignored. Returns 0 when the condition already holds as lambda -> 0.
double lambda0_threshold(const LimitParams& lp);

/// inf_{r>0} f_lambda(r) over the scan range, without the boundary check.
double f_lambda_inf(const LimitParams& lp);

/// U_eps(r) = [N(N-2)]^{(N-2)/4} (eps / (eps^2 + r^2))^{(N-2)/2}.
double bubble_value(int dim, double eps, double r);
/// dU_eps/dr.
double bubble_derivative(int dim, double eps, double r);

struct SobolevConstant {
  double value = 0.0;          // S = (int |grad U_eps|^2)^{2/N}
  double gradient_norm2 = 0.0;  // int |grad U_eps|^2
  double power_integral = 0.0;  // int U_eps^{2*}
};

/// Best Sobolev constant from the radial integrals of the bubble. Throws InconsistencyError when
/// the two integrals differ by more than 1e-8 relative.
SobolevConstant sobolev_constant(int dim, double eps = 1.0);

struct Amplitudes {
  double s = 0.0;
  double t = 0.0;
  double energy = 0.0;           // I(s U_1, t U_1)
  double expected_energy = 0.0;  // S_{infty,lambda}^{N/2} / N
  double ray_residual = 0.0;     // I'(u)u
};

/// Nehari scaling of (r U_1, U_1). Throws InconsistencyError when the energy identity fails
/// beyond 1e-6 relative.
Amplitudes minimizer_amplitudes(const LimitParams& lp, double S, double r_lambda);

}  // namespace wcs
