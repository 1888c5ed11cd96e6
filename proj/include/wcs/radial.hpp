#pragma once

#include <functional>
#include <limits>
#include <vector>

namespace wcs {

struct Integral {
  double value = 0.0;
  double error = 0.0;
};

/// Surface area of the unit sphere in R^N, 2 pi^{N/2} / Gamma(N/2).
double sphere_area(int dim);

/// Adaptive Gauss-Kronrod quadrature of f on [a,b] (finite or b = +inf), split into geometric
/// panels at scale * 2^k plus any `breaks` inside the interval. The half-line beyond the last
/// panel is mapped onto (0,1] by r = R/x, so no truncation radius is involved.
Integral integrate_radial(const std::function<double(double)>& f, double a, double b, double scale,
                          const std::vector<double>& breaks = {});

/// int over the ball shell a < |x| < b in R^N of the radial function g: sphere_area(N) int g(r) r^{N-1} dr.
Integral integrate_shell(const std::function<double(double)>& g, int dim, double a, double b, double scale,
                         const std::vector<double>& breaks = {});

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

}  // namespace wcs
