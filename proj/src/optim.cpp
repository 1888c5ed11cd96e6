#include "wcs/optim.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

namespace wcs {

ScalarMin golden_section(const std::function<double(double)>& f, double a, double b, double tol) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (std::abs(b - a) > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
    if (b - a <= std::numeric_limits<double>::epsilon() * (std::abs(a) + std::abs(b))) break;
  }
  const double x = 0.5 * (a + b);
  const double fx = f(x);
  if (fc < fx && fc <= fd) return {c, fc};
  if (fd < fx) return {d, fd};
  return {x, fx};
}

LogScanMin log_scan_min(const std::function<double(double)>& f, double lo, double hi, int points, double log_tol) {
  if (!(lo > 0.0) || !(hi > lo) || points < 3) throw std::invalid_argument("log_scan_min: bad range");
  const double a = std::log(lo);
  const double b = std::log(hi);
  const double h = (b - a) / (points - 1);
  int best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (int i = 0; i < points; ++i) {
    const double v = f(std::exp(a + h * i));
    if (v < best_value) {
      best_value = v;
      best = i;
    }
  }
  LogScanMin out;
  out.at_boundary = best == 0 || best == points - 1;
  const double left = a + h * std::max(best - 1, 0);
  const double right = a + h * std::min(best + 1, points - 1);
  const auto refined = golden_section([&f](double t) { return f(std::exp(t)); }, left, right, log_tol);
  if (refined.value <= best_value) {
    out.x = std::exp(refined.x);
    out.value = refined.value;
  } else {
    out.x = std::exp(a + h * best);
    out.value = best_value;
  }
  return out;
}

BfgsResult bfgs_minimize(const std::function<double(const Vec&)>& f, const std::function<Vec(const Vec&)>& grad,
                         Vec x0, const BfgsOptions& options) {
  const auto n = x0.size();
  BfgsResult r;
  r.x = std::move(x0);
  r.value = f(r.x);
  Vec g = grad(r.x);
  Mat hinv = Mat::Identity(n, n);
  for (r.iterations = 0; r.iterations < options.max_iterations; ++r.iterations) {
    r.gradient_norm = g.norm();
    if (r.gradient_norm <= options.gradient_tol) {
      r.converged = true;
      return r;
    }
    Vec dir = -hinv * g;
    double slope = g.dot(dir);
    if (!(slope < 0.0)) {
      hinv.setIdentity();
      dir = -g;
      slope = -g.squaredNorm();
    }
    double step = 1.0;
    double trial = f(r.x + step * dir);
    while (!(trial <= r.value + 1e-4 * step * slope) && step > 1e-20) {
      step *= 0.5;
      trial = f(r.x + step * dir);
    }
    if (step <= 1e-20) break;
    const Vec s = step * dir;
    const Vec xn = r.x + s;
    const Vec gn = grad(xn);
    const Vec y = gn - g;
    const double sy = s.dot(y);
    if (sy > 1e-300) {
      if (r.iterations == 0) hinv *= sy / y.squaredNorm();
      const double rho = 1.0 / sy;
      const Mat id = Mat::Identity(n, n);
      hinv = (id - rho * s * y.transpose()) * hinv * (id - rho * y * s.transpose()) + rho * s * s.transpose();
    }
    const bool tiny = s.norm() <= options.step_tol * (1.0 + r.x.norm());
    r.x = xn;
    r.value = trial;
    g = gn;
    if (tiny) break;
  }
  r.gradient_norm = g.norm();
  r.converged = r.gradient_norm <= options.gradient_tol;
  return r;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = x.size();
  if (n < 3 || y.size() != n) throw std::invalid_argument("fit_line: need at least three points");
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("fit_line: degenerate abscissae");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = y[i] - fit.intercept - fit.slope * x[i];
    rss += e * e;
  }
  const double dof = static_cast<double>(n) - 2.0;
  fit.slope_stderr = std::sqrt(rss / dof / sxx);
  const boost::math::students_t dist(dof);
  fit.slope_halfwidth = boost::math::quantile(boost::math::complement(dist, 0.025)) * fit.slope_stderr;
  return fit;
}

}  // namespace wcs
