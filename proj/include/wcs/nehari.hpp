#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "wcs/energy.hpp"

namespace wcs {

/// A solver could not produce an accepted critical point.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The ray through u never meets the Nehari set (B(u,u) <= 0 with trivial X-tilde).
class NoProjectionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A computed critical point contradicts the fully-nontrivial criterion: the run is wrong.
class ContradictionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Threshold bisection could not bracket the crossing.
class BracketError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Classification { trivial, semitrivial1, semitrivial2, fully_nontrivial };

std::string to_string(Classification c);
Classification classification_from_string(const std::string& s);

struct SolverConfig {
  /// Euclidean norm of the coefficient gradient required at acceptance.
  double tolerance = 1e-10;
  int descent_iterations = 400;
  /// Relative preconditioned gradient size at which descent hands over to Newton.
  double descent_tol = 1e-6;
  int newton_iterations = 80;
  /// Seeds (t e_j, +-t e_j) for j = 1..symmetric_seeds.
  int symmetric_seeds = 4;
  int random_seeds = 4;
  /// Number of low modes that carry random seed noise.
  int random_modes = 6;
  /// delta in the cross seeds (w1, delta w2), (delta w1, w2).
  double cross_delta = 0.1;
  double deflation_shift = 1.0;
  double deflation_power = 2.0;
  int deflation_restarts = 3;
  double triviality_floor = 1e-10;
  double dedup_tol = 1e-4;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct CriticalPoint {
  PairField u;
  double energy = 0.0;
  double gradient_norm = 0.0;
  double b_value = 0.0;
  double b1 = 0.0;
  double b2 = 0.0;
  double mass1 = 0.0;  // int |u1|^p
  double mass2 = 0.0;  // int |u2|^p
  Classification classification = Classification::trivial;
  int orbit_id = 0;
};

/// Summary of a scalar critical point of J_i.
struct ScalarSolution {
  ScalarField w;
  double energy = 0.0;
  double b_value = 0.0;
  double gradient_norm = 0.0;
};

struct NehariResiduals {
  double ray = 0.0;
  std::vector<double> tilde;
  double max_abs() const;
};

/// Classification from the mass floor: component i vanishes when
/// int |u_i|^p < floor * max(1, int |u_1|^p + int |u_2|^p).
Classification classify_by_mass(double mass1, double mass2, double floor);

CriticalPoint make_critical_point(const SystemFunctional& f, const Vec& x, double triviality_floor = 1e-10);

NehariResiduals nehari_residuals(const SystemFunctional& f, const PairField& u);

/// Point of the generalized Nehari set t u + v, t > 0, v in X-tilde, maximising J on that set.
PairField nehari_project(const SystemFunctional& f, const PairField& u);
Vec nehari_project(const ScalarFunctional& f, const Vec& w);

/// Lowest-energy scalar critical point with positive energy found by multistart.
ScalarSolution scalar_ground_state(const ScalarFunctional& f, const SolverConfig& config);

struct C0Result {
  double c0 = 0.0;
  ScalarSolution w1;
  ScalarSolution w2;
  /// min{B_1(w1,w1), B_2(w2,w2)}.
  double b_bound() const { return std::min(w1.b_value, w2.b_value); }
};

C0Result c0_threshold(const SystemParams& params, const SpacePtr& space, const SolverConfig& config);

struct SolveStats {
  int starts = 0;
  int accepted = 0;
  long long newton_iterations = 0;
  long long descent_iterations = 0;
};

struct GroundStateResult {
  CriticalPoint point;
  std::optional<bool> below_c0;
  SolveStats stats;
};

/// Multistart minimisation of J over the Nehari set followed by Newton polishing; returns the
/// lowest accepted critical point with positive energy.
GroundStateResult ground_state(const SystemFunctional& f, const SolverConfig& config, const C0Result* c0 = nullptr);

/// Classifies a critical point; throws ContradictionError when 0 < J < c0 but the mass floor
/// says a component vanishes.
Classification classify(const CriticalPoint& point, double c0, double triviality_floor = 1e-10);

struct MultiplicityResult {
  /// Distinct fully nontrivial orbits with 0 < J < c0, sorted by energy then orbit id.
  std::vector<CriticalPoint> orbits;
  /// Every converged critical point that was deflated (trivial, semitrivial, above c0, ...).
  std::vector<CriticalPoint> deflated;
  SolveStats stats;
};

/// Deflated multistart Newton search for `k` orbits. Best effort: may return fewer.
MultiplicityResult multiplicity_search(const SystemFunctional& f, int k, int budget, const SolverConfig& config,
                                       const C0Result& c0);

/// Orbit ids: two points share an id iff some sign image of one lies within `tol` of the other
/// (coefficient distance, compared against the first member of each orbit).
std::vector<int> orbit_dedup(const std::vector<PairField>& points, double tol);
double orbit_distance(const Vec& x, const Vec& y, Eigen::Index modes);

struct SphereInfResult {
  double estimate = 0.0;
  /// Norm of the tangential preconditioned gradient at the best point.
  double stationarity = 0.0;
  int samples = 0;
};

/// Upper estimate of inf{J(u) : u in X+, ||u|| = rho} (gradient norm) by sampling plus local descent.
SphereInfResult sphere_inf(const SystemFunctional& f, double rho, int budget, std::uint64_t seed);

struct ZmSupResult {
  double value = 0.0;
  Vec maximizer;  // coefficients of w on the first m modes
  bool exact_zero = false;
};

/// sup of J_lambda over Z_m = {(w,w) : w in span(e_1..e_m)}.
ZmSupResult zm_sup(const SystemParams& params, const SpacePtr& space, int m, double lambda,
                   const SolverConfig& config = {});

struct LambdaThreshold {
  double value = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool exact_zero = false;
  int evaluations = 0;
};

/// Empirical threshold: smallest lambda with zm_sup(lambda) < c0, by bisection on log lambda.
LambdaThreshold lambda_threshold(const SystemParams& params, const SpacePtr& space, int m, double c0,
                                 const SolverConfig& config = {}, double lambda_lo = 1e-6, double lambda_hi = 1e8);

}  // namespace wcs
