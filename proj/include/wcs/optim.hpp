#pragma once

#include <functional>

#include "wcs/spectral_domain.hpp"

namespace wcs {

struct ScalarMin {
  double x = 0.0;
  double value = 0.0;
};

/// Golden-section minimisation of a unimodal f on [a,b], stopping when the bracket is shorter
/// than `tol`.
ScalarMin golden_section(const std::function<double(double)>& f, double a, double b, double tol = 1e-12);

/// Scan `points` log-spaced abscissae in [lo, hi], then refine around the best point by golden
/// section on log x. Returns the minimiser in x (not log x). `at_boundary` is set when the best scan
/// point is an end point.
struct LogScanMin {
  double x = 0.0;
  double value = 0.0;
  bool at_boundary = false;
};
LogScanMin log_scan_min(const std::function<double(double)>& f, double lo, double hi, int points = 2001,
                        double log_tol = 1e-10);

struct BfgsOptions {
  int max_iterations = 500;
  double gradient_tol = 1e-10;
  double step_tol = 1e-14;
};

struct BfgsResult {
  Vec x;
  double value = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Quasi-Newton minimisation with an Armijo backtracking line search.
BfgsResult bfgs_minimize(const std::function<double(const Vec&)>& f,
                         const std::function<Vec(const Vec&)>& grad, Vec x0, const BfgsOptions& options = {});

/// Least-squares line y = intercept + slope x with the standard error of the slope.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double slope_halfwidth = 0.0;  // 95% two-sided Student-t half width
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace wcs
