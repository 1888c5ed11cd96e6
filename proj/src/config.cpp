#include "wcs/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace wcs {

namespace {

using nlohmann::json;

/// Reads fields of one JSON object and rejects any key that was not consumed.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception&) {
      throw ConfigError(where(key) + ": wrong type");
    }
  }

  void get(const char* key, double& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    if (!it->is_number()) throw ConfigError(where(key) + ": expected a number");
    out = it->get<double>();
  }

  void get(const char* key, int& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    if (!it->is_number_integer()) throw ConfigError(where(key) + ": expected an integer");
    out = it->get<int>();
  }

  void get(const char* key, std::uint64_t& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    if (!it->is_number_unsigned() && !(it->is_number_integer() && it->get<long long>() >= 0)) {
      throw ConfigError(where(key) + ": expected a nonnegative integer");
    }
    out = it->get<std::uint64_t>();
  }

  void get(const char* key, bool& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    if (!it->is_boolean()) throw ConfigError(where(key) + ": expected a boolean");
    out = it->get<bool>();
  }

  void get(const char* key, std::string& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    if (!it->is_string()) throw ConfigError(where(key) + ": expected a string");
    out = it->get<std::string>();
  }

  /// Nested object, or nullptr when absent.
  const json* child(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string where(const std::string& key) const { return path_ + "." + key; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(path_ + ": unknown key '" + it.key() + "'");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_problem(const json& j, ProblemConfig& p) {
  Reader r(j, "problem");
  auto& s = p.params;
  r.get("kappa1", s.kappa1);
  r.get("kappa2", s.kappa2);
  r.get("mu1", s.mu1);
  r.get("mu2", s.mu2);
  r.get("lambda", s.lambda);
  r.get("alpha", s.alpha);
  r.get("beta", s.beta);
  bool has_p = j.contains("p");
  r.get("p", s.p);
  if (!has_p) s.p = s.alpha + s.beta;
  r.get("critical", s.critical);
  r.get("lengths", p.lengths);
  r.get("cutoffs", p.cutoffs);
  r.get("quadrature_factor", p.quadrature_factor);
  r.finish();
  s.dim = static_cast<int>(p.lengths.size());
}

void read_solver(const json& j, SolverConfig& s) {
  Reader r(j, "solver");
  r.get("tolerance", s.tolerance);
  r.get("descent_iterations", s.descent_iterations);
  r.get("descent_tol", s.descent_tol);
  r.get("newton_iterations", s.newton_iterations);
  r.get("symmetric_seeds", s.symmetric_seeds);
  r.get("random_seeds", s.random_seeds);
  r.get("random_modes", s.random_modes);
  r.get("cross_delta", s.cross_delta);
  r.get("deflation_shift", s.deflation_shift);
  r.get("deflation_power", s.deflation_power);
  r.get("deflation_restarts", s.deflation_restarts);
  r.get("triviality_floor", s.triviality_floor);
  r.get("dedup_tol", s.dedup_tol);
  r.get("seed", s.seed);
  r.get("threads", s.threads);
  r.finish();
}

void read_claim(const json& j, ClaimTask& c) {
  Reader r(j, "task.estimates.claim");
  r.get("dim", c.dim);
  r.get("box_length", c.box_length);
  r.get("kappa1_ratio", c.kappa1_ratio);
  r.get("kappa2_ratio", c.kappa2_ratio);
  r.get("mu1", c.mu1);
  r.get("mu2", c.mu2);
  r.get("alpha", c.alpha);
  r.get("beta", c.beta);
  r.get("lambda_factor", c.lambda_factor);
  r.get("eps", c.eps);
  r.get("samples", c.samples);
  r.finish();
}

void read_calculus(const json& j, CalculusTask& c) {
  Reader r(j, "task.estimates.calculus");
  r.get("q", c.q);
  std::vector<std::vector<double>> ex;
  if (j.contains("exponents")) {
    r.get("exponents", ex);
    c.exponents.clear();
    for (const auto& e : ex) {
      if (e.size() != 2) throw ConfigError("task.estimates.calculus.exponents: expected [alpha, beta] pairs");
      c.exponents.emplace_back(e[0], e[1]);
    }
  }
  r.get("radius", c.radius);
  r.finish();
}

void read_task(const json& j, TaskConfig& t) {
  Reader r(j, "task");
  if (const auto* m = r.child("multiplicity")) {
    Reader s(*m, "task.multiplicity");
    s.get("orbits", t.multiplicity.orbits);
    s.get("budget", t.multiplicity.budget);
    s.finish();
  }
  if (const auto* th = r.child("thresholds")) {
    Reader s(*th, "task.thresholds");
    s.get("m", t.thresholds.m);
    s.get("lambda_grid", t.thresholds.lambda_grid);
    s.get("lambda_lo", t.thresholds.lambda_lo);
    s.get("lambda_hi", t.thresholds.lambda_hi);
    s.finish();
  }
  if (const auto* l = r.child("limit")) {
    Reader s(*l, "task.limit");
    s.get("mu1", t.limit.mu1);
    s.get("mu2", t.limit.mu2);
    s.get("lambda", t.limit.lambda);
    s.get("alpha", t.limit.alpha);
    s.get("beta", t.limit.beta);
    s.get("dim", t.limit.dim);
    s.finish();
  }
  if (const auto* e = r.child("estimates")) {
    Reader s(*e, "task.estimates");
    auto& est = t.estimates;
    s.get("dims", est.dims);
    s.get("eps", est.eps);
    s.get("slope_tolerance", est.slope_tolerance);
    s.get("cutoff_delta", est.cutoff_delta);
    s.get("claim_enabled", est.claim_enabled);
    if (const auto* c = s.child("claim")) read_claim(*c, est.claim);
    if (const auto* c = s.child("calculus")) read_calculus(*c, est.calculus);
    s.finish();
  }
  r.finish();
}

void read_output(const json& j, OutputConfig& o) {
  Reader r(j, "output");
  r.get("dir", o.dir);
  r.get("stem", o.stem);
  r.get("format", o.format);
  r.get("wall_clock", o.wall_clock);
  r.finish();
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

bool positive(double v) { return v > 0.0 && std::isfinite(v); }

}  // namespace

void RunConfig::validate() const {
  try {
    problem.params.validate();
  } catch (const PreconditionError& e) {
    throw ConfigError(std::string("problem: ") + e.what());
  }
  require(!problem.lengths.empty(), "problem.lengths: must be nonempty");
  for (double l : problem.lengths) require(positive(l), "problem.lengths: must be positive");
  require(problem.cutoffs.size() == problem.lengths.size(), "problem.cutoffs: one cutoff per axis");
  for (int k : problem.cutoffs) require(k >= 1, "problem.cutoffs: must be at least 1");
  require(positive(problem.quadrature_factor), "problem.quadrature_factor: must be positive");

  require(positive(solver.tolerance), "solver.tolerance: must be positive");
  require(positive(solver.descent_tol), "solver.descent_tol: must be positive");
  require(positive(solver.triviality_floor), "solver.triviality_floor: must be positive");
  require(positive(solver.dedup_tol), "solver.dedup_tol: must be positive");
  require(positive(solver.deflation_shift), "solver.deflation_shift: must be positive");
  require(positive(solver.deflation_power), "solver.deflation_power: must be positive");
  require(solver.cross_delta >= 0.0, "solver.cross_delta: must be nonnegative");
  require(solver.descent_iterations >= 0 && solver.newton_iterations >= 1, "solver: iteration budgets must be positive");
  require(solver.symmetric_seeds >= 0 && solver.random_seeds >= 0 && solver.random_modes >= 1,
          "solver: seed counts must be nonnegative");
  require(solver.deflation_restarts >= 0, "solver.deflation_restarts: must be nonnegative");
  require(solver.threads >= 1, "solver.threads: must be at least 1");

  require(task.multiplicity.orbits >= 1, "task.multiplicity.orbits: must be at least 1");
  require(task.multiplicity.budget >= 1, "task.multiplicity.budget: must be at least 1");
  require(task.thresholds.m >= 1, "task.thresholds.m: must be at least 1");
  for (double l : task.thresholds.lambda_grid) require(positive(l), "task.thresholds.lambda_grid: must be positive");
  require(positive(task.thresholds.lambda_lo) && task.thresholds.lambda_hi > task.thresholds.lambda_lo,
          "task.thresholds: need 0 < lambda_lo < lambda_hi");
  try {
    task.limit.validate();
  } catch (const PreconditionError& e) {
    throw ConfigError(std::string("task.limit: ") + e.what());
  }
  const auto& est = task.estimates;
  for (int n : est.dims) require(n >= 3, "task.estimates.dims: must be at least 3");
  for (double e : est.eps) require(positive(e), "task.estimates.eps: must be positive");
  require(positive(est.slope_tolerance), "task.estimates.slope_tolerance: must be positive");
  require(positive(est.cutoff_delta), "task.estimates.cutoff_delta: must be positive");
  const auto& c = est.claim;
  require(c.dim >= 3, "task.estimates.claim.dim: must be at least 3");
  require(positive(c.box_length), "task.estimates.claim.box_length: must be positive");
  require(positive(c.kappa1_ratio) && positive(c.kappa2_ratio), "task.estimates.claim: kappa ratios must be positive");
  require(positive(c.lambda_factor), "task.estimates.claim.lambda_factor: must be positive");
  for (double e : c.eps) require(positive(e), "task.estimates.claim.eps: must be positive");
  require(c.samples >= 0, "task.estimates.claim.samples: must be nonnegative");
  try {
    LimitParams lp{c.mu1, c.mu2, 1.0, c.alpha, c.beta, c.dim};
    lp.validate();
  } catch (const PreconditionError& e) {
    throw ConfigError(std::string("task.estimates.claim: ") + e.what());
  }
  for (double q : est.calculus.q) require(q > 1.0, "task.estimates.calculus.q: must exceed 1");
  for (const auto& [a, b] : est.calculus.exponents) {
    require(a > 1.0 && b > 1.0, "task.estimates.calculus.exponents: must exceed 1");
  }
  require(positive(est.calculus.radius), "task.estimates.calculus.radius: must be positive");

  require(!output.dir.empty(), "output.dir: must be nonempty");
  require(!output.stem.empty(), "output.stem: must be nonempty");
  require(output.format == "json" || output.format == "csv" || output.format == "both",
          "output.format: must be json, csv or both");
}

RunConfig parse_config(const nlohmann::json& j) {
  RunConfig cfg;
  Reader r(j, "config");
  if (const auto* p = r.child("problem")) read_problem(*p, cfg.problem);
  cfg.problem.params.dim = static_cast<int>(cfg.problem.lengths.size());
  if (const auto* s = r.child("solver")) read_solver(*s, cfg.solver);
  if (const auto* t = r.child("task")) read_task(*t, cfg.task);
  if (const auto* o = r.child("output")) read_output(*o, cfg.output);
  r.finish();
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

nlohmann::json to_json(const RunConfig& c) {
  const auto& s = c.problem.params;
  nlohmann::json problem{{"kappa1", s.kappa1},   {"kappa2", s.kappa2},   {"mu1", s.mu1},
                         {"mu2", s.mu2},         {"lambda", s.lambda},   {"alpha", s.alpha},
                         {"beta", s.beta},       {"p", s.p},             {"critical", s.critical},
                         {"lengths", c.problem.lengths}, {"cutoffs", c.problem.cutoffs},
                         {"quadrature_factor", c.problem.quadrature_factor}};
  const auto& v = c.solver;
  nlohmann::json solver{{"tolerance", v.tolerance},
                        {"descent_iterations", v.descent_iterations},
                        {"descent_tol", v.descent_tol},
                        {"newton_iterations", v.newton_iterations},
                        {"symmetric_seeds", v.symmetric_seeds},
                        {"random_seeds", v.random_seeds},
                        {"random_modes", v.random_modes},
                        {"cross_delta", v.cross_delta},
                        {"deflation_shift", v.deflation_shift},
                        {"deflation_power", v.deflation_power},
                        {"deflation_restarts", v.deflation_restarts},
                        {"triviality_floor", v.triviality_floor},
                        {"dedup_tol", v.dedup_tol},
                        {"seed", v.seed},
                        {"threads", v.threads}};
  const auto& t = c.task;
  const auto& e = t.estimates;
  std::vector<std::vector<double>> ex;
  for (const auto& [a, b] : e.calculus.exponents) ex.push_back({a, b});
  nlohmann::json task{
      {"multiplicity", {{"orbits", t.multiplicity.orbits}, {"budget", t.multiplicity.budget}}},
      {"thresholds",
       {{"m", t.thresholds.m},
        {"lambda_grid", t.thresholds.lambda_grid},
        {"lambda_lo", t.thresholds.lambda_lo},
        {"lambda_hi", t.thresholds.lambda_hi}}},
      {"limit",
       {{"mu1", t.limit.mu1},
        {"mu2", t.limit.mu2},
        {"lambda", t.limit.lambda},
        {"alpha", t.limit.alpha},
        {"beta", t.limit.beta},
        {"dim", t.limit.dim}}},
      {"estimates",
       {{"dims", e.dims},
        {"eps", e.eps},
        {"slope_tolerance", e.slope_tolerance},
        {"cutoff_delta", e.cutoff_delta},
        {"claim_enabled", e.claim_enabled},
        {"claim",
         {{"dim", e.claim.dim},
          {"box_length", e.claim.box_length},
          {"kappa1_ratio", e.claim.kappa1_ratio},
          {"kappa2_ratio", e.claim.kappa2_ratio},
          {"mu1", e.claim.mu1},
          {"mu2", e.claim.mu2},
          {"alpha", e.claim.alpha},
          {"beta", e.claim.beta},
          {"lambda_factor", e.claim.lambda_factor},
          {"eps", e.claim.eps},
          {"samples", e.claim.samples}}},
        {"calculus", {{"q", e.calculus.q}, {"exponents", ex}, {"radius", e.calculus.radius}}}}}};
  nlohmann::json output{{"dir", c.output.dir},
                        {"stem", c.output.stem},
                        {"format", c.output.format},
                        {"wall_clock", c.output.wall_clock}};
  return {{"problem", problem}, {"solver", solver}, {"task", task}, {"output", output}};
}

}  // namespace wcs
