#include "lef/commands.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <random>

#include "lef/annulus.hpp"
#include "lef/asympt.hpp"
#include "lef/errors.hpp"
#include "lef/quad.hpp"
#include "lef/radial.hpp"
#include "lef/report.hpp"
#include "lef/threshold.hpp"

namespace lef {

namespace fs = std::filesystem;

int exit_status_for(const std::string& category) {
  static const std::map<std::string, int> table = {
      {"ConfigError", kExitConfig},
      {"ParseError", kExitConfig},
      {"CoefficientError", kExitConfig},
      {"ContractViolation", kExitConfig},
      {"NonIntegrable", kExitNonIntegrable},
      {"NoConvergence", kExitNoConvergence},
      {"LinearSolveFailure", kExitNoConvergence},
      {"MaxPrincipleViolation", kExitVerification},
      {"WindowTooFar", kExitVerification},
      {"VerificationFailure", kExitVerification},
  };
  auto it = table.find(category);
  return it == table.end() ? kExitInternal : it->second;
}

bool is_known_command(const std::string& command) {
  static const char* names[] = {"check", "threshold", "solve-radial",
                                "solve-annulus", "verify", "report"};
  return std::any_of(std::begin(names), std::end(names),
                     [&](const char* n) { return command == n; });
}

int report_error(const std::string& command, const std::string& category,
                 const std::string& message, const fs::path& out_dir, std::ostream& log) {
  const int status = exit_status_for(category);
  Json j = Json::object();
  j["status"] = "error";
  j["command"] = command;
  j["category"] = category;
  j["exit_status"] = status;
  j["message"] = message;
  const std::string text = dump(j);
  try {
    write_atomic(out_dir / "error.json", text);
  } catch (const std::exception&) {
    // stdout still carries the error record
  }
  log << text;
  return status;
}

namespace {

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

// All diagnostic keys appear in every diagnostics file, null when the
// command does not compute them.
Json empty_diagnostics(const std::string& command) {
  Json d = Json::object();
  d["command"] = command;
  for (const char* key :
       {"T", "B_c", "psi_p", "psi_q", "margin", "iterations", "sup_step", "res_y", "res_z",
        "M_measured", "dev_end", "fitted_exponent_u", "fitted_exponent_v", "bound_constant_u",
        "bound_constant_v", "monotonicity_defect"}) {
    d[key] = nullptr;
  }
  return d;
}

struct RadialRun {
  ProblemSpec solved;  // the problem actually solved (majorized if needed)
  ThresholdResult threshold;
  LogGridSolution solution;
  std::pair<double, double> residual;
  BoundCheck bound;
  LimitCheck limit;
};

RadialRun run_radial(const RunConfig& cfg) {
  const ProblemSpec& spec = cfg.problem;
  spec.validate();
  ProblemSpec solved = spec.radial() ? spec : spec.majorized(cfg.annulus.majorant_samples);
  ThresholdResult th = compute_threshold(solved, cfg.solver.quad_rel_tol);
  LogGridSolution sol = solve_radial(solved, th, cfg.solver);
  auto res = residual_radial(sol, solved);
  BoundCheck bc = bound_check(sol);
  LimitCheck lc = limit_check(sol, solved, 10.0 * cfg.solver.picard_tol, cfg.solver.quad_rel_tol);
  return RadialRun{std::move(solved), th, std::move(sol), res, bc, lc};
}

void fill_radial(Json& d, const RadialRun& run) {
  d["T"] = run.solution.grid.T();
  d["B_c"] = std::exp(run.solution.grid.T());
  d["psi_p"] = run.threshold.psi_p_at_T;
  d["psi_q"] = run.threshold.psi_q_at_T;
  d["margin"] = run.threshold.margin;
  d["iterations"] = run.solution.iterations;
  d["sup_step"] = run.solution.sup_step;
  d["res_y"] = run.residual.first;
  d["res_z"] = run.residual.second;
  d["M_measured"] = run.bound.M_measured;
  d["dev_end"] = std::max(run.limit.dev_u_end, run.limit.dev_v_end);
  d["threshold_T"] = run.threshold.T;
  d["S_max"] = run.solution.grid.S_max();
  d["n"] = static_cast<long long>(run.solution.grid.size());
  d["majorized"] = !run.solved.p.radial() || !run.solved.q.radial();
  d["sup_u"] = run.bound.sup_u;
  d["sup_v"] = run.bound.sup_v;
  d["dev_u_end"] = run.limit.dev_u_end;
  d["dev_v_end"] = run.limit.dev_v_end;
  d["k_margin"] = k_membership_margin(run.solution);
}

std::string radial_csv(const LogGridSolution& sol) {
  RadialTable t = to_physical(sol);
  const auto r = to_std(t.r), u = to_std(t.u), v = to_std(t.v);
  return to_csv({{"r", &r}, {"u", &u}, {"v", &v}});
}

struct AnnulusRun {
  AnnulusSolution solution;
  Supersolution super;
  std::pair<double, double> residual;
};

// Smallest B_c 2^k (k >= 1) inside the radial domain where the radial
// supersolution is within 1e-4 of c; the end of the radial domain otherwise.
double automatic_r_outer(const LogGridSolution& sol) {
  const double s_in = sol.grid.T();
  const double s_end = sol.grid.S_max();
  for (double s = s_in + std::log(2.0); s < s_end; s += std::log(2.0)) {
    const double du = std::abs(interpolate(sol.grid, sol.y, s) - sol.c);
    const double dv = std::abs(interpolate(sol.grid, sol.z, s) - sol.c);
    if (std::max(du, dv) <= 1e-4) return std::exp(s);
  }
  return std::exp(s_end);
}

AnnulusRun run_annulus(const RunConfig& cfg, const RadialRun& radial) {
  const AnnulusConfig& a = cfg.annulus;
  const double r_in = std::exp(radial.solution.grid.T());
  const double r_out = a.r_outer ? *a.r_outer : automatic_r_outer(radial.solution);
  if (r_out > std::exp(radial.solution.grid.S_max()) * (1 + 1e-12)) {
    throw ConfigError("'r_outer': exceeds the radial solution domain (r <= " +
                      format_double(std::exp(radial.solution.grid.S_max())) + ")");
  }
  AnnulusGrid grid = build_annulus_grid(r_in, r_out, a.n_r, a.n_theta);
  Supersolution super = radial_supersolution(cfg.problem, grid, radial.solution, a.majorant_samples);
  AnnulusSolution sol = monotone_iterate(cfg.problem, grid, super.u, super.v, a.solver);
  auto res = residual_annulus(sol, cfg.problem);
  return AnnulusRun{std::move(sol), std::move(super), res};
}

void fill_annulus(Json& d, const AnnulusRun& run) {
  const AnnulusSolution& s = run.solution;
  d["radial_iterations"] = nullptr;
  d["iterations"] = s.outer_iterations;
  d["M_measured"] = s.u.cwiseAbs().maxCoeff() + s.v.cwiseAbs().maxCoeff();
  d["monotonicity_defect"] = s.monotonicity_defect;
  d["supersolution_gap"] = s.supersolution_gap;
  d["res_u"] = run.residual.first;
  d["res_v"] = run.residual.second;
  d["r_inner"] = s.grid.r_inner();
  d["r_outer"] = s.grid.r_outer();
  d["n_r"] = static_cast<long long>(s.grid.n_r());
  d["n_theta"] = static_cast<long long>(s.grid.n_theta());
  d["min_defect_u"] = run.super.min_defect_u;
  d["min_defect_v"] = run.super.min_defect_v;
  d["angular_spread_u"] = angular_spread(s.u);
  d["angular_spread_v"] = angular_spread(s.v);
  d["max_linear_residual"] = s.linear_residuals.empty()
               ? 0.0
               : *std::max_element(s.linear_residuals.begin(), s.linear_residuals.end());
}

std::string annulus_csv(const AnnulusSolution& s) {
  std::vector<double> r, th, u, v;
  const auto n = static_cast<std::size_t>(s.grid.n_r() * s.grid.n_theta());
  r.reserve(n);
  th.reserve(n);
  u.reserve(n);
  v.reserve(n);
  for (Eigen::Index i = 0; i < s.grid.n_r(); ++i) {
    for (Eigen::Index j = 0; j < s.grid.n_theta(); ++j) {
      r.push_back(s.grid.r(i));
      th.push_back(s.grid.theta(j));
      u.push_back(s.u(i, j));
      v.push_back(s.v(i, j));
    }
  }
  return to_csv({{"r", &r}, {"theta", &th}, {"u", &u}, {"v", &v}});
}

Json integrability_entry(const CoefficientField& field, const RunConfig& cfg) {
  Json e = Json::object();
  e["field"] = field.describe();
  e["radial"] = field.radial();
  const CoefficientField f =
      field.radial() ? field : CoefficientField::majorant_of(field, cfg.annulus.majorant_samples);
  if (!field.radial()) e["majorant"] = f.describe();
  TailIntegralResult r = weighted_log_integral(f, cfg.problem.A + 1.0, cfg.solver.quad_rel_tol);
  e["lower"] = cfg.problem.A + 1.0;
  e["value"] = r.value;
  e["tail_bound"] = r.tail_bound;
  e["truncation_point"] = r.truncation_point;
  e["converged"] = r.converged;
  return e;
}

int cmd_check(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
  cfg.problem.validate();
  Json j = Json::object();
  j["status"] = "ok";
  j["p"] = integrability_entry(cfg.problem.p, cfg);
  j["q"] = integrability_entry(cfg.problem.q, cfg);
  const std::string text = dump(j);
  write_atomic(out / cfg.report.check_json, text);
  log << text;
  return kExitOk;
}

int cmd_threshold(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
  const ProblemSpec& spec = cfg.problem;
  spec.validate();
  const ProblemSpec solved = spec.radial() ? spec : spec.majorized(cfg.annulus.majorant_samples);
  ThresholdResult th = compute_threshold(solved, cfg.solver.quad_rel_tol);
  Json j = Json::object();
  j["status"] = "ok";
  j["T"] = th.T;
  j["B_c"] = th.B_c;
  j["psi_p"] = th.psi_p_at_T;
  j["psi_q"] = th.psi_q_at_T;
  j["margin"] = th.margin;
  j["invariance_factor"] = spec.invariance_factor();
  j["majorized"] = !spec.radial();
  const std::string text = dump(j);
  write_atomic(out / cfg.report.threshold_json, text);
  log << text;
  return kExitOk;
}

int cmd_solve_radial(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
  RadialRun run = run_radial(cfg);
  Json d = empty_diagnostics("solve-radial");
  fill_radial(d, run);
  write_atomic(out / cfg.report.solution_csv, radial_csv(run.solution));
  write_atomic(out / cfg.report.diagnostics_json, dump(d));
  log << dump(d);
  return kExitOk;
}

int cmd_solve_annulus(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
  RadialRun radial = run_radial(cfg);
  AnnulusRun run = run_annulus(cfg, radial);
  Json d = empty_diagnostics("solve-annulus");
  fill_radial(d, radial);
  fill_annulus(d, run);
  d["radial_iterations"] = radial.solution.iterations;
  write_atomic(out / cfg.report.annulus_csv, annulus_csv(run.solution));
  write_atomic(out / cfg.report.diagnostics_json, dump(d));
  log << dump(d);
  return kExitOk;
}

class CheckTable {
 public:
  // pass when value >= threshold (or <= when at_most)
  void add(const std::string& name, double value, double threshold, bool at_most) {
    const bool pass = std::isfinite(value) && (at_most ? value <= threshold : value >= threshold);
    all_ = all_ && pass;
    Json row = Json::object();
    row["name"] = name;
    row["value"] = value;
    row["relation"] = at_most ? "<=" : ">=";
    row["threshold"] = threshold;
    row["pass"] = pass;
    rows_.push_back(std::move(row));
    char line[160];
    std::snprintf(line, sizeof line, "%-28s %s  value=%s %s %s\n", name.c_str(),
                  pass ? "PASS" : "FAIL", format_double(value).c_str(), at_most ? "<=" : ">=",
                  format_double(threshold).c_str());
    text_ += line;
  }
  bool all_pass() const { return all_; }
  Json rows() const { return rows_; }
  const std::string& text() const { return text_; }

 private:
  Json rows_ = Json::array();
  bool all_ = true;
  std::string text_;
};

double min_increment(const Eigen::VectorXd& x) {
  if (x.size() < 2) return 0.0;
  return (x.tail(x.size() - 1) - x.head(x.size() - 1)).minCoeff();
}

// sup over the grid of e^{2s} p(e^s) (2c)^alpha, the scale of y''.
double curvature_scale(const RadialRun& run) {
  const ProblemSpec& s = run.solved;
  double m = 0.0;
  for (Eigen::Index i = 0; i < run.solution.grid.size(); ++i) {
    const double t = run.solution.grid.node(i);
    m = std::max(m, s.p.log_density(t) * std::pow(2 * s.c, s.alpha));
    m = std::max(m, s.q.log_density(t) * std::pow(2 * s.c, s.beta));
  }
  return m;
}

double random_k_margin(const RadialRun& run, int members, std::uint64_t seed) {
  const LogGrid& grid = run.solution.grid;
  const double c = run.solved.c;
  RadialOperator F(run.solved, grid, 1e-12);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double margin = std::numeric_limits<double>::infinity();
  for (int m = 0; m < members; ++m) {
    Eigen::VectorXd y(grid.size()), z(grid.size());
    for (Eigen::Index i = 0; i < grid.size(); ++i) {
      y[i] = 2 * c * unit(rng);
      z[i] = 2 * c * unit(rng);
    }
    auto [fy, fz] = F(y, z);
    margin = std::min(margin, c - (fy.array() - c).abs().maxCoeff());
    margin = std::min(margin, c - (fz.array() - c).abs().maxCoeff());
  }
  return margin;
}

int cmd_verify(const RunConfig& cfg, const fs::path& out, std::uint64_t seed, std::ostream& log) {
  RadialRun run = run_radial(cfg);
  const double c = cfg.problem.c;
  const LogGridSolution& sol = run.solution;
  CheckTable t;
  t.add("threshold_margin", run.threshold.margin, 0.0, false);
  t.add("k_membership_margin", k_membership_margin(sol), -1e-12 * c, false);
  t.add("sup_u_le_2c", run.bound.sup_u, 2 * c, true);
  t.add("sup_v_le_2c", run.bound.sup_v, 2 * c, true);
  t.add("min_u_positive", sol.y.minCoeff(), 0.0, false);
  t.add("min_v_positive", sol.z.minCoeff(), 0.0, false);
  t.add("u_nondecreasing", min_increment(sol.y), -1e-12 * c, false);
  t.add("v_nondecreasing", min_increment(sol.z), -1e-12 * c, false);
  t.add("limit_dev_u", run.limit.dev_u_end, run.limit.bound_u, true);
  t.add("limit_dev_v", run.limit.dev_v_end, run.limit.bound_v, true);
  const double res_tol = 1e-4 * std::max(1.0, curvature_scale(run));
  t.add("residual_y", run.residual.first, res_tol, true);
  t.add("residual_z", run.residual.second, res_tol, true);
  t.add("picard_sup_step", sol.sup_step, cfg.solver.picard_tol, true);
  if (cfg.report.random_members > 0) {
    t.add("random_k_invariance", random_k_margin(run, cfg.report.random_members, seed),
          -1e-12 * c, false);
  }

  Json d = empty_diagnostics("verify");
  fill_radial(d, run);
  if (cfg.annulus.present) {
    AnnulusRun ann = run_annulus(cfg, run);
    const AnnulusSolution& s = ann.solution;
    t.add("annulus_monotonicity", s.monotonicity_defect, -1e-10, false);
    t.add("annulus_below_super", s.supersolution_gap, -1e-10, false);
    t.add("annulus_min_u", s.u.minCoeff(), 0.0, false);
    t.add("annulus_min_v", s.v.minCoeff(), 0.0, false);
    t.add("annulus_sup_u_le_2c", s.u.maxCoeff(), 2 * c, true);
    t.add("annulus_sup_v_le_2c", s.v.maxCoeff(), 2 * c, true);
    t.add("annulus_super_defect_u", ann.super.min_defect_u, -1e-8 * c, false);
    t.add("annulus_super_defect_v", ann.super.min_defect_v, -1e-8 * c, false);
    fill_annulus(d, ann);
    d["radial_iterations"] = sol.iterations;
  }

  Json v = Json::object();
  v["status"] = t.all_pass() ? "pass" : "fail";
  v["seed"] = static_cast<long long>(seed);
  v["checks"] = t.rows();
  write_atomic(out / cfg.report.verify_json, dump(v));
  write_atomic(out / cfg.report.diagnostics_json, dump(d));
  log << t.text() << (t.all_pass() ? "verify: all checks pass\n" : "verify: FAILED\n");
  return t.all_pass() ? kExitOk : kExitVerification;
}

int cmd_report(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
  RadialRun run = run_radial(cfg);
  DecayOptions opt;
  opt.rel_tol = cfg.solver.quad_rel_tol;
  opt.noise_floor = std::max(opt.noise_floor, 100.0 * cfg.solver.picard_tol);
  if (cfg.report.decay_r_lo) opt.window = std::make_pair(*cfg.report.decay_r_lo, *cfg.report.decay_r_hi);
  DecayReport rep = decay_fit(run.solution, run.solved, opt);

  Json d = empty_diagnostics("report");
  fill_radial(d, run);
  d["fitted_exponent_u"] = rep.fitted_exponent_u;
  d["fitted_exponent_v"] = rep.fitted_exponent_v;
  d["bound_constant_u"] = rep.bound_constant_u;
  d["bound_constant_v"] = rep.bound_constant_v;

  Json j = Json::object();
  j["window_lo"] = rep.window_lo;
  j["window_hi"] = rep.window_hi;
  j["fitted_exponent_u"] = rep.fitted_exponent_u;
  j["fitted_exponent_v"] = rep.fitted_exponent_v;
  j["claimed_exponent_u"] = rep.claimed_exponent_u;
  j["claimed_exponent_v"] = rep.claimed_exponent_v;
  j["bound_constant_u"] = rep.bound_constant_u;
  j["bound_constant_v"] = rep.bound_constant_v;
  j["sample_radii"] = to_std(rep.sample_radii);
  j["deviations_u"] = to_std(rep.deviations_u);
  j["deviations_v"] = to_std(rep.deviations_v);
  j["ip_values"] = to_std(rep.ip_values);
  j["iq_values"] = to_std(rep.iq_values);

  const auto r = to_std(rep.sample_radii), du = to_std(rep.deviations_u),
             ip = to_std(rep.ip_values), dv = to_std(rep.deviations_v),
             iq = to_std(rep.iq_values);
  write_atomic(out / cfg.report.decay_csv,
               to_csv({{"r", &r}, {"dev_u", &du}, {"I_p", &ip}, {"dev_v", &dv}, {"I_q", &iq}}));
  write_atomic(out / cfg.report.decay_json, dump(j));
  write_atomic(out / cfg.report.diagnostics_json, dump(d));
  log << dump(d);
  return kExitOk;
}

}  // namespace

int run_command(const RunConfig& config, const std::string& command, const fs::path& out_dir,
                std::uint64_t seed, std::ostream& log) {
  try {
    fs::create_directories(out_dir);
    if (command == "check") return cmd_check(config, out_dir, log);
    if (command == "threshold") return cmd_threshold(config, out_dir, log);
    if (command == "solve-radial") return cmd_solve_radial(config, out_dir, log);
    if (command == "solve-annulus") return cmd_solve_annulus(config, out_dir, log);
    if (command == "verify") return cmd_verify(config, out_dir, seed, log);
    if (command == "report") return cmd_report(config, out_dir, log);
    return report_error(command, "ConfigError", "unknown command '" + command + "'", out_dir, log);
  } catch (const Error& e) {
    return report_error(command, e.category(), e.what(), out_dir, log);
  } catch (const std::exception& e) {
    return report_error(command, "InternalError", e.what(), out_dir, log);
  }
}

}  // namespace lef
