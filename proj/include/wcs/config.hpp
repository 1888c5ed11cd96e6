#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "wcs/energy.hpp"
#include "wcs/limit_system.hpp"
#include "wcs/nehari.hpp"

namespace wcs {

/// The configuration file is malformed or violates an invariant.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ProblemConfig {
  SystemParams params;
  std::vector<double> lengths{1.0};
  std::vector<int> cutoffs{32};
  double quadrature_factor = 1.0;
};

struct MultiplicityTask {
  int orbits = 2;
  int budget = 12;
};

struct ThresholdTask {
  int m = 3;
  std::vector<double> lambda_grid;
  double lambda_lo = 1e-6;
  double lambda_hi = 1e8;
};

struct ClaimTask {
  int dim = 5;
  double box_length = 24.0;
  /// kappa_i = ratio_i * gamma_1 of the box.
  double kappa1_ratio = 0.5;
  double kappa2_ratio = 0.5;
  double mu1 = 2.0;
  double mu2 = 1.0;
  double alpha = 4.0 / 3.0;
  double beta = 2.0;
  /// lambda = lambda_factor * Lambda_0 of the limit system.
  double lambda_factor = 2.0;
  std::vector<double> eps{1e-2, 1e-3};
  int samples = 4;
};

struct CalculusTask {
  std::vector<double> q{1.5, 2.0, 3.0};
  std::vector<std::pair<double, double>> exponents{{2.0, 2.0}, {1.5, 2.5}};
  double radius = 1.0;
};

struct EstimatesTask {
  std::vector<int> dims{4, 5};
  std::vector<double> eps;  // empty: default grid
  double slope_tolerance = 0.15;
  double cutoff_delta = 1.5;
  bool claim_enabled = true;
  ClaimTask claim;
  CalculusTask calculus;
};

struct TaskConfig {
  MultiplicityTask multiplicity;
  ThresholdTask thresholds;
  LimitParams limit;
  EstimatesTask estimates;
};

struct OutputConfig {
  std::string dir = ".";
  std::string stem = "report";
  std::string format = "json";
  /// Record wall-clock seconds in the timing block (breaks byte-identical reruns).
  bool wall_clock = false;
};

struct RunConfig {
  ProblemConfig problem;
  SolverConfig solver;
  TaskConfig task;
  OutputConfig output;

  /// Throws ConfigError on any invariant violation.
  void validate() const;
};

/// Strict parse: unknown keys and wrong types raise ConfigError. Missing keys keep defaults.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);
nlohmann::json to_json(const RunConfig& config);

}  // namespace wcs
