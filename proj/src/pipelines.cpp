#include "wcs/pipelines.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <ostream>
#include <sstream>

#include "wcs/estimates.hpp"
#include "wcs/limit_system.hpp"
#include "wcs/nehari.hpp"
#include "wcs/synchronized.hpp"

namespace wcs {

namespace {

using nlohmann::json;

std::vector<double> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

SpacePtr build_space(const RunConfig& c) {
  return make_space(make_basis(BoxDomain(c.problem.lengths), c.problem.cutoffs), c.problem.quadrature_factor);
}

json stats_json(const SolveStats& s) {
  return {{"starts", s.starts},
          {"accepted", s.accepted},
          {"newton_iterations", s.newton_iterations},
          {"descent_iterations", s.descent_iterations}};
}

json c0_json(const C0Result& c0) {
  return {{"c0", c0.c0},
          {"w1_energy", c0.w1.energy},
          {"w2_energy", c0.w2.energy},
          {"w1_b", c0.w1.b_value},
          {"w2_b", c0.w2.b_value},
          {"b_bound", c0.b_bound()}};
}

CsvTable points_table(const std::string& name, const std::vector<CriticalPoint>& pts) {
  CsvTable t{name, {"energy", "gradient_norm", "b_value", "b1", "b2", "mass1", "mass2", "classification", "orbit_id"}, {}};
  for (const auto& p : pts) {
    t.add({format_number(p.energy), format_number(p.gradient_norm), format_number(p.b_value), format_number(p.b1),
           format_number(p.b2), format_number(p.mass1), format_number(p.mass2), to_string(p.classification),
           format_number(static_cast<long long>(p.orbit_id))});
  }
  return t;
}

json points_json(const std::vector<CriticalPoint>& pts) {
  json a = json::array();
  for (const auto& p : pts) a.push_back(point_json(p));
  sort_by_energy(a);
  return a;
}

void check(PipelineOutput& out, bool ok, const std::string& what) {
  if (!ok) out.failures.push_back(what);
}

/// Energy identity on the Nehari set: J = (1/2 - 1/p) B.
bool energy_identity(const CriticalPoint& p, double exponent) {
  const double expected = (0.5 - 1.0 / exponent) * p.b_value;
  return std::abs(p.energy - expected) <= 1e-6 * std::max(1.0, std::abs(p.energy));
}

PipelineOutput ground_state_pipeline(const RunConfig& c) {
  PipelineOutput out;
  const auto space = build_space(c);
  const SystemFunctional f(c.problem.params, space);
  const auto c0 = c0_threshold(c.problem.params, space, c.solver);
  auto gs = ground_state(f, c.solver, &c0);
  gs.point.classification = classify(gs.point, c0.c0, c.solver.triviality_floor);
  const auto& p = gs.point;
  const auto res = nehari_residuals(f, p.u);
  json rec = point_json(p);
  rec["nehari_residual"] = res.max_abs();
  out.results["records"] = json::array({rec});
  out.results["checks"] = {
      {"fully_nontrivial", p.classification == Classification::fully_nontrivial},
      {"gradient_below_tolerance", p.gradient_norm < c.solver.tolerance},
      {"energy_in_range", p.energy > 0.0 && p.energy < c0.c0},
      {"energy_identity", energy_identity(p, f.exponent())},
      {"b_in_range", p.b_value > 0.0 && p.b_value < c0.b_bound()}};
  for (auto it = out.results["checks"].begin(); it != out.results["checks"].end(); ++it) {
    check(out, it.value().get<bool>(), "ground-state: " + it.key());
  }
  out.thresholds["c0"] = c0_json(c0);
  out.timing["ground_state"] = stats_json(gs.stats);
  out.tables.push_back(points_table("records", {p}));
  return out;
}

PipelineOutput multiplicity_pipeline(const RunConfig& c) {
  PipelineOutput out;
  const auto space = build_space(c);
  const SystemFunctional f(c.problem.params, space);
  const auto c0 = c0_threshold(c.problem.params, space, c.solver);
  const auto m = multiplicity_search(f, c.task.multiplicity.orbits, c.task.multiplicity.budget, c.solver, c0);
  out.results["records"] = points_json(m.orbits);
  out.results["deflated"] = points_json(m.deflated);
  out.results["orbits_found"] = m.orbits.size();
  out.results["orbits_requested"] = c.task.multiplicity.orbits;
  check(out, static_cast<int>(m.orbits.size()) >= c.task.multiplicity.orbits,
        "multiplicity: found " + std::to_string(m.orbits.size()) + " orbits, requested " +
            std::to_string(c.task.multiplicity.orbits));
  for (const auto& p : m.orbits) {
    check(out, p.energy > 0.0 && p.energy < c0.c0, "multiplicity: orbit energy outside (0, c0)");
  }
  out.thresholds["c0"] = c0_json(c0);
  out.timing["multiplicity"] = stats_json(m.stats);
  auto sorted = m.orbits;
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.energy < b.energy; });
  out.tables.push_back(points_table("records", sorted));
  return out;
}

PipelineOutput thresholds_pipeline(const RunConfig& c) {
  PipelineOutput out;
  const auto space = build_space(c);
  const auto& tk = c.task.thresholds;
  const auto c0 = c0_threshold(c.problem.params, space, c.solver);
  json sweep = json::array();
  CsvTable t{"zm_sup", {"lambda", "zm_sup", "exact_zero"}, {}};
  std::vector<double> values;
  for (double l : tk.lambda_grid) {
    const auto z = zm_sup(c.problem.params, space, tk.m, l, c.solver);
    sweep.push_back({{"lambda", l}, {"value", z.value}, {"exact_zero", z.exact_zero}, {"maximizer", to_std(z.maximizer)}});
    t.add({format_number(l), format_number(z.value), z.exact_zero ? "1" : "0"});
    values.push_back(z.value);
  }
  const auto th = lambda_threshold(c.problem.params, space, tk.m, c0.c0, c.solver, tk.lambda_lo, tk.lambda_hi);
  out.results["zm_sup"] = sweep;
  out.results["m"] = tk.m;
  for (std::size_t i = 1; i < values.size(); ++i) {
    const bool zero = values[i] == 0.0 && values[i - 1] == 0.0;
    check(out, zero || values[i] < values[i - 1], "thresholds: zm_sup is not decreasing along lambda_grid");
  }
  out.thresholds["c0"] = c0_json(c0);
  out.thresholds["lambda_bar"] = {{"m", tk.m},
                                  {"value", th.value},
                                  {"lower", th.lower},
                                  {"upper", th.upper},
                                  {"exact_zero", th.exact_zero}};
  out.timing["threshold_evaluations"] = th.evaluations;
  out.tables.push_back(t);
  return out;
}

PipelineOutput limit_pipeline(const RunConfig& c) {
  PipelineOutput out;
  const auto& lp = c.task.limit;
  const auto sc = sobolev_constant(lp.dim);
  const double l0 = lambda0_threshold(lp);
  const auto si = S_infty(lp, sc.value);
  const auto am = minimizer_amplitudes(lp, sc.value, si.r_lambda);
  const double grid = S_infty_grid(lp, sc.value);
  const double upper = f_lambda(1.0, lp) * sc.value;
  out.results["sobolev"] = {
      {"S", sc.value}, {"gradient_norm2", sc.gradient_norm2}, {"power_integral", sc.power_integral}};
  out.results["amplitudes"] = {{"s", am.s},
                               {"t", am.t},
                               {"energy", am.energy},
                               {"expected_energy", am.expected_energy},
                               {"ray_residual", am.ray_residual}};
  out.results["grid_oracle"] = grid;
  out.results["upper_bound"] = upper;
  check(out, std::abs(grid - si.value) <= 1e-4 * si.value, "limit: grid oracle disagrees with S_infty");
  check(out, si.value <= upper * (1.0 + 1e-12), "limit: S_infty exceeds S f_lambda(1)");
  out.thresholds["S_infty"] = {{"value", si.value}, {"r_lambda", si.r_lambda}, {"f_min", si.f_min}};
  out.thresholds["Lambda0"] = l0;
  out.thresholds["bound"] = f_lambda_bound(lp);
  return out;
}

PipelineOutput synchronized_pipeline(const RunConfig& c) {
  PipelineOutput out;
  const auto& q = c.problem.params;
  if (q.kappa1 != q.kappa2) throw PreconditionError("synchronized: requires kappa1 = kappa2");
  const auto space = build_space(c);
  const SystemFunctional f(q, space);
  const auto roots = find_roots(q);
  const ScalarFunctional unit(q.kappa1, 1.0, q.p, space);
  const auto w = scalar_ground_state(unit, c.solver);
  json recs = json::array();
  std::vector<CriticalPoint> pts;
  CsvTable t{"records", {"r", "s", "t", "energy", "scalar_residual", "system_residual"}, {}};
  for (double r : roots.roots) {
    const auto root = amplitudes(r, q);
    const auto [e1, e2] = euler_identities(root, q);
    const auto sol = synchronized_solution(w.w, root, f);
    json rec = point_json(sol.point);
    rec["r"] = root.r;
    rec["s"] = root.s;
    rec["t"] = root.t;
    rec["h_residual"] = root.h_residual;
    rec["euler1"] = e1;
    rec["euler2"] = e2;
    rec["scalar_residual"] = sol.scalar_residual;
    rec["system_residual"] = sol.system_residual;
    recs.push_back(rec);
    check(out, std::abs(e1) <= 1e-10 && std::abs(e2) <= 1e-10, "synchronized: Euler identities fail at a root");
    check(out, sol.system_residual < 10.0 * sol.scalar_residual || sol.system_residual == 0.0,
          "synchronized: system residual is not within 10x the scalar residual");
    t.add({format_number(root.r), format_number(root.s), format_number(root.t), format_number(sol.point.energy),
           format_number(sol.scalar_residual), format_number(sol.system_residual)});
  }
  sort_by_energy(recs);
  out.results["records"] = recs;
  out.results["guaranteed"] = roots.guaranteed;
  out.results["scalar_energy"] = w.energy;
  check(out, !roots.guaranteed || !roots.roots.empty(), "synchronized: h changes sign but no root was found");
  out.tables.push_back(t);
  return out;
}

PipelineOutput estimates_pipeline(const RunConfig& c) {
  PipelineOutput out;
  const auto& e = c.task.estimates;
  const CutoffSpec cutoff{e.cutoff_delta, 2.0 * e.cutoff_delta};
  const auto eps = e.eps.empty() ? default_eps_grid() : e.eps;
  CsvTable bn{"bn",
              {"dim", "eps", "grad2", "pow_crit", "pow_crit_m1", "l1", "grad_l1", "pow_crit_m2", "l2",
               "grad2_deficit", "pow_crit_deficit"},
              {}};
  CsvTable fits{"orders", {"dim", "quantity", "expected", "slope", "halfwidth", "intercept", "log_corrected", "pass"}, {}};
  json orders = json::array();
  for (int n : e.dims) {
    const auto rep = order_fit(n, cutoff, eps, e.slope_tolerance);
    json checks = json::array();
    for (const auto& r : rep.rows) {
      bn.add({format_number(static_cast<long long>(n)), format_number(r.eps), format_number(r.grad2),
              format_number(r.pow_crit), format_number(r.pow_crit_m1), format_number(r.l1), format_number(r.grad_l1),
              format_number(r.pow_crit_m2), format_number(r.l2), format_number(r.grad2_deficit),
              format_number(r.pow_crit_deficit)});
    }
    for (const auto& k : rep.checks) {
      checks.push_back({{"quantity", k.quantity},
                        {"expected", k.expected},
                        {"slope", k.slope},
                        {"halfwidth", k.halfwidth},
                        {"intercept", k.intercept},
                        {"log_corrected", k.log_corrected},
                        {"pass", k.pass}});
      fits.add({format_number(static_cast<long long>(n)), k.quantity, format_number(k.expected), format_number(k.slope),
                format_number(k.halfwidth), format_number(k.intercept), k.log_corrected ? "1" : "0",
                k.pass ? "1" : "0"});
      check(out, k.pass, "verify-estimates: N=" + std::to_string(n) + " slope of " + k.quantity + " is off");
    }
    orders.push_back({{"dim", n}, {"checks", checks}});
  }
  out.results["orders"] = orders;
  out.tables.push_back(bn);
  out.tables.push_back(fits);

  if (e.claim_enabled) {
    const auto& cl = e.claim;
    const BoxDomain dom(std::vector<double>(static_cast<std::size_t>(cl.dim), cl.box_length));
    const double g1 = cl.dim * M_PI * M_PI / (cl.box_length * cl.box_length);
    const double k1 = cl.kappa1_ratio * g1;
    const double k2 = cl.kappa2_ratio * g1;
    if (resonant_kappa(dom, k1) || resonant_kappa(dom, k2)) {
      out.notes.push_back("resonant kappa: kappa1, kappa2 must not be Dirichlet eigenvalues; claim_sweep skipped");
      out.results["claim"] = {{"skipped", true}, {"note", out.notes.back()}};
    } else {
      LimitParams lp{cl.mu1, cl.mu2, 1.0, cl.alpha, cl.beta, cl.dim};
      const double l0 = lambda0_threshold(lp);
      lp.lambda = cl.lambda_factor * (l0 > 0.0 ? l0 : 1.0);
      const auto sc = sobolev_constant(cl.dim);
      const auto si = S_infty(lp, sc.value);
      const auto am = minimizer_amplitudes(lp, sc.value, si.r_lambda);
      const ClaimSetup setup{dom, k1, k2, lp, CutoffSpec::for_domain(dom), am.s, am.t,
                             std::pow(si.value, 0.5 * cl.dim) / cl.dim};
      const auto rep = claim_sweep(setup, cl.eps, cl.samples, c.solver.seed);
      json rows = json::array();
      CsvTable ct{"claim", {"eps", "best", "ray", "ray_direct", "bound", "radius", "tilde_dim", "region_positive", "below"}, {}};
      for (const auto& r : rep.rows) {
        const auto rm = ray_max(r.eps, setup.cutoff, lp, k1, k2, am.s, am.t);
        const double gap = std::abs(rm.closed_form - rm.direct) / std::max(std::abs(rm.closed_form), 1e-300);
        rows.push_back({{"eps", r.eps},
                        {"best", r.best},
                        {"ray", r.ray},
                        {"ray_direct", rm.direct},
                        {"ray_gap", gap},
                        {"bound", r.bound},
                        {"radius", r.radius},
                        {"tilde_dim", r.tilde_dim},
                        {"region_samples", r.region_samples},
                        {"region_positive", r.region_positive},
                        {"below", r.below}});
        ct.add({format_number(r.eps), format_number(r.best), format_number(r.ray), format_number(rm.direct),
                format_number(r.bound), format_number(r.radius), format_number(static_cast<long long>(r.tilde_dim)),
                format_number(static_cast<long long>(r.region_positive)), r.below ? "1" : "0"});
        check(out, r.below, "verify-estimates: best value not below the bound at eps = " + format_number(r.eps));
        check(out, gap <= 1e-8, "verify-estimates: ray_max closed form and direct maximum disagree");
        check(out, r.region_positive == 0, "verify-estimates: J > 0 outside the sampled region radius");
      }
      out.results["claim"] = {{"skipped", false},
                              {"dim", cl.dim},
                              {"kappa1", k1},
                              {"kappa2", k2},
                              {"lambda", lp.lambda},
                              {"rows", rows}};
      out.thresholds["Lambda0"] = l0;
      out.thresholds["S_infty"] = {{"value", si.value}, {"r_lambda", si.r_lambda}};
      out.tables.push_back(ct);
    }
  }

  const auto& ca = e.calculus;
  const auto cr = calculus_inequalities(ca.q, ca.exponents, ca.radius, default_r_grid());
  json qs = json::array();
  for (const auto& k : cr.q) {
    qs.push_back({{"q", k.q}, {"constant", k.constant}, {"worst_excess", k.worst_excess}, {"pass", k.pass}});
    check(out, k.pass, "verify-estimates: (q) inequality fails for q = " + format_number(k.q));
  }
  json ab = json::array();
  for (const auto& k : cr.ab) {
    ab.push_back({{"alpha", k.alpha},
                  {"beta", k.beta},
                  {"radius", k.radius},
                  {"constant", k.constant},
                  {"worst_excess", k.worst_excess},
                  {"pass", k.pass}});
    check(out, k.pass, "verify-estimates: (ab) inequality fails");
  }
  out.results["calculus"] = {{"q", qs}, {"ab", ab}};
  return out;
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"ground-state", "multiplicity",   "thresholds",
                                              "limit",        "synchronized",   "verify-estimates"};
  return names;
}

PipelineOutput run_pipeline(const std::string& subcommand, const RunConfig& config) {
  if (subcommand == "ground-state") return ground_state_pipeline(config);
  if (subcommand == "multiplicity") return multiplicity_pipeline(config);
  if (subcommand == "thresholds") return thresholds_pipeline(config);
  if (subcommand == "limit") return limit_pipeline(config);
  if (subcommand == "synchronized") return synchronized_pipeline(config);
  if (subcommand == "verify-estimates") return estimates_pipeline(config);
  throw ConfigError("unknown subcommand '" + subcommand + "'");
}

int exit_code_for(const std::exception_ptr& error) {
  try {
    std::rethrow_exception(error);
  } catch (const ConfigError&) {
    return kExitValidation;
  } catch (const PreconditionError&) {
    return kExitValidation;
  } catch (const ContradictionError&) {
    return kExitProperty;
  } catch (const InconsistencyError&) {
    return kExitProperty;
  } catch (...) {
    return kExitSolver;
  }
}

int run(const std::string& subcommand, const RunConfig& config, std::ostream& err) {
  PipelineOutput out;
  const auto start = std::chrono::steady_clock::now();
  try {
    out = run_pipeline(subcommand, config);
  } catch (const std::exception& e) {
    const int code = exit_code_for(std::current_exception());
    err << "wcsolve " << subcommand << ": " << e.what() << "\n";
    return code;
  }
  if (config.output.wall_clock) {
    out.timing["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  out.results["subcommand"] = subcommand;
  out.results["notes"] = out.notes;
  out.results["failures"] = out.failures;
  for (const auto& n : out.notes) err << "note: " << n << "\n";
  for (const auto& f : out.failures) err << "property check failed: " << f << "\n";

  try {
    const auto report = make_report(to_json(config), out.results, out.thresholds, out.timing);
    const std::string text = report.dump(2) + "\n";
    validate_report(nlohmann::json::parse(text));
    std::filesystem::create_directories(config.output.dir);
    const std::filesystem::path base = std::filesystem::path(config.output.dir) / config.output.stem;
    const bool json_out = config.output.format != "csv";
    const bool csv_out = config.output.format != "json";
    if (csv_out) {
      for (const auto& t : out.tables) write_atomic(base.string() + "-" + t.name + ".csv", t.render());
    }
    if (json_out) write_atomic(base.string() + ".json", text);
  } catch (const std::exception& e) {
    err << "wcsolve " << subcommand << ": cannot write report: " << e.what() << "\n";
    return kExitSolver;
  }
  return out.failures.empty() ? kExitOk : kExitProperty;
}

}  // namespace wcs
