#include "wcs/nehari.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "wcs/optim.hpp"
#include "wcs/parallel.hpp"

namespace wcs {

std::string to_string(Classification c) {
  switch (c) {
    case Classification::trivial:
      return "trivial";
    case Classification::semitrivial1:
      return "semitrivial-1";
    case Classification::semitrivial2:
      return "semitrivial-2";
    case Classification::fully_nontrivial:
      return "fully-nontrivial";
  }
  return "trivial";
}

Classification classification_from_string(const std::string& s) {
  if (s == "trivial") return Classification::trivial;
  if (s == "semitrivial-1") return Classification::semitrivial1;
  if (s == "semitrivial-2") return Classification::semitrivial2;
  if (s == "fully-nontrivial") return Classification::fully_nontrivial;
  throw PreconditionError("unknown classification '" + s + "'");
}

double NehariResiduals::max_abs() const {
  double m = std::abs(ray);
  for (double r : tilde) m = std::max(m, std::abs(r));
  return m;
}

namespace {

constexpr double kArmijo = 1e-4;

template <class F>
double plus_norm(const F& f, const Vec& x) {
  double s = 0.0;
  for (auto i : f.plus_indices()) s += f.stiffness()[i] * x[i] * x[i];
  return std::sqrt(s);
}

double h1_norm(const Vec& stiffness, const Vec& x) {
  return std::sqrt((stiffness.array() * x.array().square()).sum());
}

template <class F>
Vec restrict_plus(const F& f, const Vec& x) {
  Vec y = Vec::Zero(x.size());
  for (auto i : f.plus_indices()) y[i] = x[i];
  return y;
}

/// Maximiser of J over {t x+ + v : t > 0, v in X-tilde}.
template <class F>
Vec nehari_map(const F& f, const Vec& x) {
  const auto& tilde = f.tilde_indices();
  const Vec xp = restrict_plus(f, x);
  const double pn = plus_norm(f, xp);
  if (!(pn > 1e-12 * std::max(1.0, h1_norm(f.stiffness(), x)))) {
    throw PreconditionError("nehari projection: the X+ part of u vanishes");
  }
  const double p = f.exponent();
  if (tilde.empty()) {
    const double b = f.quadratic(x);
    const double d = f.homogeneous(x);
    if (!(b > 0.0)) throw NoProjectionError("nehari projection: B(u,u) <= 0 and X-tilde is trivial");
    if (!(d > 0.0)) throw NoProjectionError("nehari projection: nonlinear part vanishes on the ray");
    return std::pow(b / d, 1.0 / (p - 2.0)) * x;
  }

  Vec base = x;
  double b = f.quadratic(base);
  double d = f.homogeneous(base);
  if (!(b > 0.0 && d > 0.0)) {
    base = xp;
    b = f.quadratic(base);
    d = f.homogeneous(base);
    if (!(b > 0.0 && d > 0.0)) throw NoProjectionError("nehari projection: ray through the X+ part is degenerate");
  }
  const double s = std::pow(b / d, 1.0 / (p - 2.0));
  const auto m = static_cast<Eigen::Index>(tilde.size());
  Vec z(m + 1);
  z[0] = s;
  for (Eigen::Index j = 0; j < m; ++j) z[j + 1] = s * base[tilde[static_cast<std::size_t>(j)]];

  auto assemble = [&](const Vec& zz) {
    Vec w = zz[0] * xp;
    for (Eigen::Index j = 0; j < m; ++j) w[tilde[static_cast<std::size_t>(j)]] = zz[j + 1];
    return w;
  };

  Vec w = assemble(z);
  double fv = f.value(w);
  const double zscale = z.norm();
  for (int it = 0; it < 200; ++it) {
    const Vec g = f.gradient(w);
    Vec rg(m + 1);
    rg[0] = g.dot(xp);
    for (Eigen::Index j = 0; j < m; ++j) rg[j + 1] = g[tilde[static_cast<std::size_t>(j)]];
    const Mat h = f.hessian(w);
    const Vec hxp = h * xp;
    Mat hr(m + 1, m + 1);
    hr(0, 0) = xp.dot(hxp);
    for (Eigen::Index j = 0; j < m; ++j) {
      const auto tj = tilde[static_cast<std::size_t>(j)];
      hr(0, j + 1) = hxp[tj];
      hr(j + 1, 0) = hxp[tj];
      for (Eigen::Index k = 0; k < m; ++k) hr(j + 1, k + 1) = h(tj, tilde[static_cast<std::size_t>(k)]);
    }
    Vec dz;
    const Eigen::LLT<Mat> llt(-hr);
    if (llt.info() == Eigen::Success) {
      dz = llt.solve(rg);
    } else {
      dz = rg.cwiseQuotient((hr.diagonal().cwiseAbs().array() + 1e-12).matrix());
    }
    const double slope = rg.dot(dz);
    if (!(slope > 0.0) || !dz.allFinite()) break;
    double step = 1.0;
    bool accepted = false;
    Vec zt;
    double ft = 0.0;
    for (int k = 0; k < 60; ++k) {
      zt = z + step * dz;
      if (zt[0] > 0.0) {
        ft = f.value(assemble(zt));
        if (ft >= fv + kArmijo * step * slope) {
          accepted = true;
          break;
        }
      }
      step *= 0.5;
    }
    if (!accepted) break;
    const double move = (step * dz).norm();
    z = zt;
    w = assemble(z);
    fv = ft;
    if (z.norm() > 1e10 * std::max(1.0, zscale)) throw NoProjectionError("nehari projection: J unbounded on the set");
    if (move <= 1e-15 * z.norm()) break;
  }
  return w;
}

template <class F>
double preconditioned_norm(const F& f, const Vec& g) {
  return std::sqrt((g.array().square() / f.stiffness().array()).sum());
}

struct DescentOutcome {
  Vec x;
  int iterations = 0;
  bool converged = false;
};

/// Preconditioned steepest descent of J restricted to the Nehari set, parametrised by X+.
template <class F>
DescentOutcome nehari_descent(const F& f, const Vec& x0, const SolverConfig& config) {
  DescentOutcome out;
  Vec w = nehari_map(f, x0);
  double jw = f.value(w);
  double tau = 1.0;
  const Vec& gam = f.stiffness();
  for (out.iterations = 0; out.iterations < config.descent_iterations; ++out.iterations) {
    const Vec g = f.gradient(w);
    Vec h = Vec::Zero(w.size());
    for (auto i : f.plus_indices()) h[i] = -g[i] / gam[i];
    const double slope = g.dot(h);
    if (std::sqrt(-slope) <= config.descent_tol * h1_norm(gam, w)) {
      out.converged = true;
      break;
    }
    bool accepted = false;
    for (int k = 0; k < 50; ++k) {
      try {
        const Vec wt = nehari_map(f, w + tau * h);
        const double jt = f.value(wt);
        if (jt <= jw + kArmijo * tau * slope) {
          w = wt;
          jw = jt;
          accepted = true;
          break;
        }
      } catch (const PreconditionError&) {
      } catch (const NoProjectionError&) {
      }
      tau *= 0.5;
    }
    if (!accepted) break;
    tau = std::min(2.0 * tau, 8.0);
  }
  out.x = std::move(w);
  return out;
}

struct NewtonOutcome {
  Vec x;
  double gradient_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Damped Newton on the full gradient with a line search on the preconditioned residual.
template <class F>
NewtonOutcome newton_polish(const F& f, Vec x, const SolverConfig& config) {
  NewtonOutcome out;
  Vec g = f.gradient(x);
  double phi = preconditioned_norm(f, g);
  for (out.iterations = 0; out.iterations < config.newton_iterations; ++out.iterations) {
    if (g.norm() <= config.tolerance) break;
    const Mat h = f.hessian(x);
    const Vec d = h.colPivHouseholderQr().solve(-g);
    if (!d.allFinite()) break;
    double step = 1.0;
    bool accepted = false;
    for (int k = 0; k < 30; ++k) {
      const Vec xt = x + step * d;
      const Vec gt = f.gradient(xt);
      const double pt = preconditioned_norm(f, gt);
      if (pt <= (1.0 - kArmijo * step) * phi) {
        x = xt;
        g = gt;
        phi = pt;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
  }
  out.gradient_norm = g.norm();
  out.converged = out.gradient_norm <= config.tolerance;
  out.x = std::move(x);
  return out;
}

struct Candidate {
  Vec x;
  double energy = 0.0;
  double gradient_norm = 0.0;
  int descent_iterations = 0;
  int newton_iterations = 0;
  bool ok = false;
  std::string failure;
};

template <class F>
Candidate solve_from_seed(const F& f, const Vec& seed, const SolverConfig& config) {
  Candidate c;
  try {
    const auto d = nehari_descent(f, seed, config);
    c.descent_iterations = d.iterations;
    const auto n = newton_polish(f, d.x, config);
    c.newton_iterations = n.iterations;
    c.x = n.x;
    c.gradient_norm = n.gradient_norm;
    c.energy = f.value(n.x);
    if (!n.converged) {
      c.failure = "newton stalled at gradient norm " + std::to_string(n.gradient_norm);
      return c;
    }
    if (!(c.energy > 0.0) || !(plus_norm(f, n.x) > 1e-6)) {
      c.failure = "converged to a point with nonpositive energy";
      return c;
    }
    c.ok = true;
  } catch (const std::exception& e) {
    c.failure = e.what();
  }
  return c;
}

template <class F>
std::size_t best_candidate(const std::vector<Candidate>& cs, const std::vector<Vec>& seeds, const F&,
                           const std::string& what) {
  std::size_t best = cs.size();
  for (std::size_t i = 0; i < cs.size(); ++i) {
    if (!cs[i].ok) continue;
    if (best == cs.size() || cs[i].energy < cs[best].energy - 1e-12 * std::abs(cs[best].energy)) best = i;
  }
  if (best == cs.size()) {
    std::ostringstream msg;
    msg << what << ": no start converged (" << seeds.size() << " starts)";
    for (std::size_t i = 0; i < cs.size(); ++i) {
      msg << "; start " << i << ": " << (cs[i].failure.empty() ? "rejected" : cs[i].failure);
    }
    throw ConvergenceError(msg.str());
  }
  return best;
}

Vec random_low_modes(std::mt19937_64& rng, Eigen::Index n, int modes) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec c = Vec::Zero(n);
  const auto k = std::min<Eigen::Index>(n, modes);
  for (Eigen::Index i = 0; i < k; ++i) c[i] = normal(rng) / static_cast<double>(i + 1);
  return c;
}

template <class F>
bool has_plus_part(const F& f, const Vec& x) {
  return plus_norm(f, x) > 1e-12 * std::max(1.0, h1_norm(f.stiffness(), x));
}

std::vector<Vec> scalar_seeds(const ScalarFunctional& f, const SolverConfig& config) {
  std::vector<Vec> seeds;
  const auto n = f.dim();
  int taken = 0;
  for (auto i : f.plus_indices()) {
    if (taken >= config.symmetric_seeds) break;
    Vec e = Vec::Zero(n);
    e[i] = 1.0;
    seeds.push_back(e);
    ++taken;
  }
  std::mt19937_64 rng(config.seed ^ 0x5ca1a7ULL);
  for (int r = 0; r < config.random_seeds; ++r) {
    Vec c = random_low_modes(rng, n, config.random_modes);
    if (has_plus_part(f, c)) seeds.push_back(c);
  }
  return seeds;
}

std::vector<Vec> system_seeds(const SystemFunctional& f, const SolverConfig& config, const C0Result* c0) {
  std::vector<Vec> seeds;
  const auto n = f.space().modes();
  int taken = 0;
  for (Eigen::Index j = 0; j < n && taken < config.symmetric_seeds; ++j) {
    Vec x = Vec::Zero(2 * n);
    x[j] = 1.0;
    x[n + j] = 1.0;
    if (!has_plus_part(f, x)) continue;
    seeds.push_back(x);
    x[n + j] = -1.0;
    seeds.push_back(x);
    ++taken;
  }
  if (c0 != nullptr) {
    const double delta = config.cross_delta;
    Vec a(2 * n);
    a << c0->w1.w.coeffs, delta * c0->w2.w.coeffs;
    Vec b(2 * n);
    b << delta * c0->w1.w.coeffs, c0->w2.w.coeffs;
    if (has_plus_part(f, a)) seeds.push_back(a);
    if (has_plus_part(f, b)) seeds.push_back(b);
  }
  std::mt19937_64 rng(config.seed);
  for (int r = 0; r < config.random_seeds; ++r) {
    Vec x(2 * n);
    x << random_low_modes(rng, n, config.random_modes), random_low_modes(rng, n, config.random_modes);
    if (has_plus_part(f, x)) seeds.push_back(x);
  }
  return seeds;
}

template <class F>
std::vector<Candidate> run_starts(const F& f, const std::vector<Vec>& seeds, const SolverConfig& config) {
  std::vector<Candidate> cs(seeds.size());
  parallel_for(static_cast<int>(seeds.size()), config.threads,
               [&](int i) { cs[static_cast<std::size_t>(i)] = solve_from_seed(f, seeds[static_cast<std::size_t>(i)], config); });
  return cs;
}

double below_margin(double c0) { return 1e-9 * std::max(1.0, std::abs(c0)); }

}  // namespace

Classification classify_by_mass(double mass1, double mass2, double floor) {
  const double scale = floor * std::max(1.0, mass1 + mass2);
  const bool zero1 = !(mass1 >= scale);
  const bool zero2 = !(mass2 >= scale);
  if (zero1 && zero2) return Classification::trivial;
  if (zero2) return Classification::semitrivial1;
  if (zero1) return Classification::semitrivial2;
  return Classification::fully_nontrivial;
}

CriticalPoint make_critical_point(const SystemFunctional& f, const Vec& x, double triviality_floor) {
  const auto& basis = f.space().basis_ptr();
  const auto n = f.space().modes();
  CriticalPoint cp{PairField::from_stacked(basis, x)};
  cp.energy = f.value(x);
  cp.gradient_norm = f.gradient(x).norm();
  const Vec& gam = basis->eigenvalues();
  cp.b1 = ((gam.array() - f.params().kappa1) * x.head(n).array().square()).sum();
  cp.b2 = ((gam.array() - f.params().kappa2) * x.tail(n).array().square()).sum();
  cp.b_value = cp.b1 + cp.b2;
  const Masses m = f.masses(x);
  cp.mass1 = m.power1;
  cp.mass2 = m.power2;
  cp.classification = classify_by_mass(cp.mass1, cp.mass2, triviality_floor);
  return cp;
}

NehariResiduals nehari_residuals(const SystemFunctional& f, const PairField& u) {
  if (!same_basis(u.basis(), f.space().basis_ptr())) throw PreconditionError("nehari_residuals: basis mismatch");
  const Vec x = u.stacked();
  if (!has_plus_part(f, x)) throw PreconditionError("nehari_residuals: u lies in X-tilde");
  const Vec g = f.gradient(x);
  NehariResiduals r;
  r.ray = g.dot(x);
  for (auto i : f.tilde_indices()) r.tilde.push_back(g[i]);
  return r;
}

PairField nehari_project(const SystemFunctional& f, const PairField& u) {
  if (!same_basis(u.basis(), f.space().basis_ptr())) throw PreconditionError("nehari_project: basis mismatch");
  return PairField::from_stacked(u.basis(), nehari_map(f, u.stacked()));
}

Vec nehari_project(const ScalarFunctional& f, const Vec& w) { return nehari_map(f, w); }

ScalarSolution scalar_ground_state(const ScalarFunctional& f, const SolverConfig& config) {
  const auto seeds = scalar_seeds(f, config);
  const auto cs = run_starts(f, seeds, config);
  const auto best = best_candidate(cs, seeds, f, "scalar ground state");
  const auto& c = cs[best];
  ScalarSolution s{ScalarField(f.space().basis_ptr(), c.x)};
  s.energy = c.energy;
  s.b_value = f.quadratic(c.x);
  s.gradient_norm = c.gradient_norm;
  return s;
}

C0Result c0_threshold(const SystemParams& params, const SpacePtr& space, const SolverConfig& config) {
  params.validate();
  const auto f1 = ScalarFunctional::for_component(params, 1, space);
  const ScalarSolution w1 = scalar_ground_state(f1, config);
  const bool identical = params.kappa1 == params.kappa2 && params.mu1 == params.mu2;
  C0Result r{0.0, w1,
             identical ? w1 : scalar_ground_state(ScalarFunctional::for_component(params, 2, space), config)};
  r.c0 = std::min(r.w1.energy, r.w2.energy);
  return r;
}

Classification classify(const CriticalPoint& point, double c0, double triviality_floor) {
  const Classification c = classify_by_mass(point.mass1, point.mass2, triviality_floor);
  if (point.energy > 0.0 && point.energy < c0 - below_margin(c0) && c != Classification::fully_nontrivial) {
    std::ostringstream msg;
    msg << "classification contradiction: energy " << point.energy << " is below c0 = " << c0
        << " but the point is " << to_string(c);
    throw ContradictionError(msg.str());
  }
  return c;
}

GroundStateResult ground_state(const SystemFunctional& f, const SolverConfig& config, const C0Result* c0) {
  f.params().validate();
  const auto seeds = system_seeds(f, config, c0);
  const auto cs = run_starts(f, seeds, config);
  GroundStateResult r;
  r.stats.starts = static_cast<int>(seeds.size());
  for (const auto& c : cs) {
    r.stats.accepted += c.ok ? 1 : 0;
    r.stats.newton_iterations += c.newton_iterations;
    r.stats.descent_iterations += c.descent_iterations;
  }
  const auto best = best_candidate(cs, seeds, f, "ground state");
  r.point = make_critical_point(f, cs[best].x, config.triviality_floor);
  if (c0 != nullptr) {
    r.point.classification = classify(r.point, c0->c0, config.triviality_floor);
    r.below_c0 = r.point.energy < c0->c0 - below_margin(c0->c0);
  }
  return r;
}

double orbit_distance(const Vec& x, const Vec& y, Eigen::Index modes) {
  if (x.size() != y.size() || x.size() != 2 * modes) throw PreconditionError("orbit_distance: size mismatch");
  const double a = std::min((x.head(modes) - y.head(modes)).squaredNorm(), (x.head(modes) + y.head(modes)).squaredNorm());
  const double b = std::min((x.tail(modes) - y.tail(modes)).squaredNorm(), (x.tail(modes) + y.tail(modes)).squaredNorm());
  return std::sqrt(a + b);
}

std::vector<int> orbit_dedup(const std::vector<PairField>& points, double tol) {
  std::vector<int> ids;
  std::vector<std::pair<Vec, int>> reps;
  for (const auto& u : points) {
    if (!points.empty() && !same_basis(u.basis(), points.front().basis())) {
      throw PreconditionError("orbit_dedup: points on different bases");
    }
    const Vec x = u.stacked();
    const auto n = u.basis()->size();
    int id = -1;
    for (const auto& [rep, rid] : reps) {
      if (orbit_distance(x, rep, n) < tol) {
        id = rid;
        break;
      }
    }
    if (id < 0) {
      id = static_cast<int>(reps.size());
      reps.emplace_back(x, id);
    }
    ids.push_back(id);
  }
  return ids;
}

namespace {

struct Deflation {
  std::vector<Vec> points;
  double shift = 1.0;
  double power = 2.0;

  void add_orbit(const SystemFunctional& f, const Vec& x) {
    for (int s1 : {1, -1}) {
      for (int s2 : {1, -1}) {
        const Vec y = f.sign_image(x, s1, s2);
        bool dup = false;
        for (const auto& q : points) dup = dup || (q - y).norm() <= 1e-14 * std::max(1.0, y.norm());
        if (!dup) points.push_back(y);
      }
    }
  }

  double log_factor(const Vec& x) const {
    double s = 0.0;
    for (const auto& q : points) s += std::log(std::pow((x - q).norm(), -power) + shift);
    return s;
  }

  Vec grad_log_factor(const Vec& x) const {
    Vec g = Vec::Zero(x.size());
    for (const auto& q : points) {
      const Vec diff = x - q;
      const double d = diff.norm();
      const double dq = std::pow(d, -power);
      g += (-power * dq / (d * d) / (dq + shift)) * diff;
    }
    return g;
  }

  double min_distance(const Vec& x) const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& q : points) m = std::min(m, (x - q).norm());
    return m;
  }
};

/// Newton on the deflated residual M(x) grad J(x).
NewtonOutcome deflated_newton(const SystemFunctional& f, Vec x, const Deflation& defl, const SolverConfig& config) {
  NewtonOutcome out;
  auto merit = [&](const Vec& y, const Vec& g) { return std::exp(defl.log_factor(y)) * preconditioned_norm(f, g); };
  Vec g = f.gradient(x);
  double phi = merit(x, g);
  const int max_it = std::max(config.newton_iterations, 100);
  for (out.iterations = 0; out.iterations < max_it; ++out.iterations) {
    if (g.norm() <= config.tolerance) break;
    const Mat h = f.hessian(x);
    const Vec dn = h.colPivHouseholderQr().solve(-g);
    if (!dn.allFinite()) break;
    const double a = defl.grad_log_factor(x).dot(dn);
    Vec d = (std::abs(1.0 - a) > 1e-12 ? 1.0 / (1.0 - a) : 1.0) * dn;
    const double radius = std::max(0.5 * x.norm(), 0.1);
    if (d.norm() > radius) d *= radius / d.norm();
    double step = 1.0;
    Vec best_x;
    Vec best_g;
    double best_phi = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 6; ++k) {
      const Vec xt = x + step * d;
      const Vec gt = f.gradient(xt);
      const double pt = merit(xt, gt);
      if (pt < best_phi) {
        best_phi = pt;
        best_x = xt;
        best_g = gt;
      }
      if (pt < phi) break;
      step *= 0.5;
    }
    if (!std::isfinite(best_phi)) break;
    x = best_x;
    g = best_g;
    phi = best_phi;
    if (x.norm() > 1e6) break;
  }
  out.gradient_norm = g.norm();
  out.converged = out.gradient_norm <= config.tolerance;
  out.x = std::move(x);
  return out;
}

}  // namespace

MultiplicityResult multiplicity_search(const SystemFunctional& f, int k, int budget, const SolverConfig& config,
                                       const C0Result& c0) {
  if (k < 1) throw PreconditionError("multiplicity_search: k must be at least 1");
  f.params().validate();
  const auto n = f.space().modes();
  MultiplicityResult r;
  Deflation defl{{}, config.deflation_shift, config.deflation_power};
  defl.add_orbit(f, Vec::Zero(2 * n));
  {
    Vec a = Vec::Zero(2 * n);
    a.head(n) = c0.w1.w.coeffs;
    defl.add_orbit(f, a);
    Vec b = Vec::Zero(2 * n);
    b.tail(n) = c0.w2.w.coeffs;
    defl.add_orbit(f, b);
  }
  const auto seeds = system_seeds(f, config, &c0);
  int attempts = 0;
  std::vector<CriticalPoint> found;
  for (const auto& seed : seeds) {
    if (static_cast<int>(found.size()) >= k || attempts >= budget) break;
    Vec x0;
    try {
      x0 = nehari_map(f, seed);
    } catch (const std::exception&) {
      continue;
    }
    for (int restart = 0; restart <= config.deflation_restarts; ++restart) {
      if (static_cast<int>(found.size()) >= k || attempts >= budget) break;
      ++attempts;
      ++r.stats.starts;
      auto nr = deflated_newton(f, x0, defl, config);
      r.stats.newton_iterations += nr.iterations;
      if (!nr.converged) break;
      auto polished = newton_polish(f, nr.x, config);
      r.stats.newton_iterations += polished.iterations;
      if (!polished.converged) break;
      if (defl.min_distance(polished.x) < config.dedup_tol) break;
      ++r.stats.accepted;
      defl.add_orbit(f, polished.x);
      CriticalPoint cp = make_critical_point(f, polished.x, config.triviality_floor);
      cp.classification = classify(cp, c0.c0, config.triviality_floor);
      const bool keep = cp.classification == Classification::fully_nontrivial && cp.energy > 0.0 &&
                        cp.energy < c0.c0 - below_margin(c0.c0);
      (keep ? found : r.deflated).push_back(std::move(cp));
    }
  }
  auto by_energy = [](const CriticalPoint& a, const CriticalPoint& b) { return a.energy < b.energy; };
  std::stable_sort(found.begin(), found.end(), by_energy);
  std::stable_sort(r.deflated.begin(), r.deflated.end(), by_energy);
  std::vector<PairField> pts;
  for (const auto& cp : found) pts.push_back(cp.u);
  const auto ids = orbit_dedup(pts, config.dedup_tol);
  int last = -1;
  for (std::size_t i = 0; i < found.size(); ++i) {
    if (ids[i] <= last) continue;
    last = ids[i];
    found[i].orbit_id = ids[i];
    r.orbits.push_back(found[i]);
  }
  for (std::size_t i = 0; i < r.deflated.size(); ++i) r.deflated[i].orbit_id = static_cast<int>(r.orbits.size() + i);
  return r;
}

SphereInfResult sphere_inf(const SystemFunctional& f, double rho, int budget, std::uint64_t seed) {
  if (!(rho > 0.0)) throw PreconditionError("sphere_inf: rho must be positive");
  if (budget < 1) throw PreconditionError("sphere_inf: budget must be positive");
  const auto& plus = f.plus_indices();
  if (plus.empty()) throw PreconditionError("sphere_inf: X+ is trivial");
  const auto m = static_cast<Eigen::Index>(plus.size());
  const Vec& gam = f.stiffness();
  Vec sq(m);
  for (Eigen::Index j = 0; j < m; ++j) sq[j] = std::sqrt(gam[plus[static_cast<std::size_t>(j)]]);

  // z on the Euclidean unit sphere maps to u_k = rho z_k / (|z| sqrt(gamma_k)), which has ||u|| = rho.
  auto embed = [&](const Vec& z) {
    Vec x = Vec::Zero(f.dim());
    const double zn = z.norm();
    for (Eigen::Index j = 0; j < m; ++j) x[plus[static_cast<std::size_t>(j)]] = rho * z[j] / (zn * sq[j]);
    return x;
  };
  auto tangential = [&](const Vec& z) {
    const Vec g = f.gradient(embed(z));
    Vec gz(m);
    for (Eigen::Index j = 0; j < m; ++j) gz[j] = g[plus[static_cast<std::size_t>(j)]] / sq[j];
    const double zn = z.norm();
    const Vec zu = z / zn;
    return Vec((rho / zn) * (gz - zu.dot(gz) * zu));
  };
  auto value = [&](const Vec& z) { return f.value(embed(z)); };
  // BFGS runs on J / rho^2, which is O(1) on the sphere for every rho.
  const double scale = 1.0 / (rho * rho);
  auto scaled_value = [&](const Vec& z) { return scale * value(z); };
  auto scaled_tangential = [&](const Vec& z) { return Vec(scale * tangential(z)); };

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  SphereInfResult r;
  r.estimate = std::numeric_limits<double>::infinity();
  BfgsOptions opts;
  opts.max_iterations = 2000;
  opts.gradient_tol = 1e-12;
  for (int s = 0; s < budget; ++s) {
    Vec z(m);
    for (Eigen::Index j = 0; j < m; ++j) z[j] = normal(rng);
    if (z.norm() == 0.0) z[0] = 1.0;
    z /= z.norm();
    const auto res = bfgs_minimize(scaled_value, scaled_tangential, z, opts);
    ++r.samples;
    const Vec& best = value(res.x) <= value(z) ? res.x : z;
    const double v = value(best);
    if (v < r.estimate) {
      r.estimate = v;
      r.stationarity = tangential(best).norm();
    }
  }
  return r;
}

ZmSupResult zm_sup(const SystemParams& params, const SpacePtr& space, int m, double lambda, const SolverConfig& config) {
  const auto n = space->modes();
  if (m < 1 || m > n) throw PreconditionError("zm_sup: m must lie in [1, number of modes]");
  const SystemParams q = params.with_lambda(lambda);
  q.validate();
  ZmSupResult r;
  r.maximizer = Vec::Zero(m);
  const Vec& gam = space->basis().eigenvalues();
  if (gam[m - 1] <= 0.5 * (q.kappa1 + q.kappa2)) {
    r.exact_zero = true;
    return r;
  }
  const SystemFunctional f(q, space);
  auto embed = [&](const Vec& c) {
    Vec x = Vec::Zero(2 * n);
    x.head(m) = c;
    x.segment(n, m) = c;
    return x;
  };
  // Variables y_j = sqrt(gamma_j) c_j.
  Vec sq = gam.head(m).cwiseSqrt();
  auto negj = [&](const Vec& y) { return -f.value(embed(y.cwiseQuotient(sq))); };
  auto negg = [&](const Vec& y) {
    const Vec g = f.gradient(embed(y.cwiseQuotient(sq)));
    return Vec(-(g.head(m) + g.segment(n, m)).cwiseQuotient(sq));
  };
  std::vector<Vec> starts;
  for (int j = 0; j < m; ++j) {
    Vec c = Vec::Zero(m);
    c[j] = 1.0;
    starts.push_back(c);
  }
  std::mt19937_64 rng(config.seed ^ 0x2a11ULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int s = 0; s < std::max(config.random_seeds, 2); ++s) {
    Vec c(m);
    for (int j = 0; j < m; ++j) c[j] = normal(rng);
    starts.push_back(c);
  }
  BfgsOptions opts;
  opts.max_iterations = 400;
  opts.gradient_tol = 1e-11;
  double best = 0.0;
  for (const auto& c : starts) {
    const Vec x = embed(c);
    const double b = f.quadratic(x);
    const double d = f.homogeneous(x);
    if (!(b > 0.0 && d > 0.0)) continue;
    const double t = std::pow(b / d, 1.0 / (q.p - 2.0));
    const auto res = bfgs_minimize(negj, negg, Vec(t * c.cwiseProduct(sq)), opts);
    if (-res.value > best) {
      best = -res.value;
      r.maximizer = res.x.cwiseQuotient(sq);
    }
  }
  r.value = best;
  return r;
}

LambdaThreshold lambda_threshold(const SystemParams& params, const SpacePtr& space, int m, double c0,
                                 const SolverConfig& config, double lambda_lo, double lambda_hi) {
  if (!(c0 > 0.0)) throw PreconditionError("lambda_threshold: c0 must be positive");
  if (!(lambda_lo > 0.0 && lambda_hi > lambda_lo)) throw PreconditionError("lambda_threshold: bad lambda range");
  LambdaThreshold r;
  auto sup = [&](double l) {
    ++r.evaluations;
    return zm_sup(params, space, m, l, config);
  };
  const auto at_lo = sup(lambda_lo);
  if (at_lo.exact_zero) {
    r.exact_zero = true;
    return r;
  }
  if (at_lo.value < c0) {
    throw BracketError("lambda_threshold: sup over Z_m is already below c0 at lambda = " + std::to_string(lambda_lo));
  }
  if (!(sup(lambda_hi).value < c0)) {
    throw BracketError("lambda_threshold: sup over Z_m stays above c0 up to lambda = " + std::to_string(lambda_hi));
  }
  double lo = lambda_lo;
  double hi = lambda_hi;
  while (hi / lo - 1.0 > 1e-4) {
    const double mid = std::sqrt(lo * hi);
    (sup(mid).value < c0 ? hi : lo) = mid;
  }
  r.lower = lo;
  r.upper = hi;
  r.value = hi;
  return r;
}

}  // namespace wcs
