#include "lef/radial.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "lef/errors.hpp"
#include "lef/quad.hpp"

namespace lef {

using Eigen::Index;
using Eigen::VectorXd;

LogGrid::LogGrid(double T, double S_max, Index n) : T_(T), S_max_(S_max), n_(n) {
  if (n < 65) throw ContractViolation("LogGrid needs at least 65 nodes");
  if (!std::isfinite(T) || !std::isfinite(S_max) || !(S_max > T)) {
    throw ContractViolation("LogGrid needs finite T < S_max");
  }
}

VectorXd LogGrid::nodes() const {
  VectorXd s(n_);
  for (Index i = 0; i < n_; ++i) s[i] = node(i);
  return s;
}

VectorXd cumulative_tail_integral(const VectorXd& f, double h) {
  const Index n = f.size();
  if (n < 4) throw ContractViolation("cumulative_tail_integral needs at least 4 samples");
  const double w = h / 24.0;
  VectorXd out(n);
  out[n - 1] = 0.0;
  // last and first panels use one-sided cubics, interior panels the
  // centred four-point rule
  out[n - 2] = w * (f[n - 4] - 5.0 * f[n - 3] + 19.0 * f[n - 2] + 9.0 * f[n - 1]);
  for (Index j = n - 3; j >= 1; --j) {
    out[j] = out[j + 1] + w * (-f[j - 1] + 13.0 * f[j] + 13.0 * f[j + 1] - f[j + 2]);
  }
  out[0] = out[1] + w * (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3]);
  return out;
}

namespace {

VectorXd sample_weight(const CoefficientField& field, const LogGrid& grid) {
  VectorXd w(grid.size());
  for (Index i = 0; i < grid.size(); ++i) w[i] = field.log_density(grid.node(i));
  return w;
}

void require_in_k(const VectorXd& v, double c, Index n, const char* name) {
  if (v.size() != n) throw ContractViolation(std::string("apply_F: ") + name + " has wrong size");
  const double slack = 1e-12 * c;
  for (Index i = 0; i < n; ++i) {
    if (!std::isfinite(v[i]) || std::abs(v[i] - c) > c + slack) {
      throw ContractViolation(std::string("apply_F: ") + name + " leaves K at node " +
                              std::to_string(i));
    }
  }
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

}  // namespace

RadialOperator::RadialOperator(const ProblemSpec& spec, const LogGrid& grid, double quad_rel_tol)
    : spec_(spec), grid_(grid) {
  spec_.validate();
  if (!spec_.radial()) throw ContractViolation("RadialOperator needs radial coefficients");
  wp_ = sample_weight(spec_.p, grid_);
  wq_ = sample_weight(spec_.q, grid_);
  const double S = grid_.S_max();
  mass_p_end_ = inner_tail(spec_.p, S, quad_rel_tol).value;
  mass_q_end_ = inner_tail(spec_.q, S, quad_rel_tol).value;
  psi_p_end_ = psi(spec_.p, S, quad_rel_tol).value;
  psi_q_end_ = psi(spec_.q, S, quad_rel_tol).value;
}

VectorXd RadialOperator::deficit(const VectorXd& weight, const VectorXd& other, double exponent,
                                 double mass_end, double psi_end) const {
  const double h = grid_.step();
  const VectorXd f = weight.array() * other.array().pow(exponent);
  const double frozen = std::pow(other[other.size() - 1], exponent);
  const VectorXd inner = cumulative_tail_integral(f, h).array() + mass_end * frozen;
  return cumulative_tail_integral(inner, h).array() + psi_end * frozen;
}

std::pair<VectorXd, VectorXd> RadialOperator::operator()(const VectorXd& y,
                                                         const VectorXd& z) const {
  const Index n = grid_.size();
  const double c = spec_.c;
  require_in_k(y, c, n, "y");
  require_in_k(z, c, n, "z");
  VectorXd y_new = c - deficit(wp_, z, spec_.alpha, mass_p_end_, psi_p_end_).array();
  VectorXd z_new = c - deficit(wq_, y, spec_.beta, mass_q_end_, psi_q_end_).array();
  return {std::move(y_new), std::move(z_new)};
}

std::pair<VectorXd, VectorXd> apply_F(const ProblemSpec& spec, const LogGrid& grid,
                                      const VectorXd& y, const VectorXd& z) {
  return RadialOperator(spec, grid)(y, z);
}

namespace {

double auto_span(const ProblemSpec& spec, double T, double picard_tol, double rel_tol) {
  const double tail_tol = picard_tol / 10.0;
  double span = 10.0;
  for (; span < 500.0; span += 1.0) {
    const double tail = std::max(psi(spec.p, T + span, rel_tol).value,
                                 psi(spec.q, T + span, rel_tol).value);
    if (tail <= tail_tol) break;
  }
  return span;
}

LogGridSolution picard(const ProblemSpec& spec, const LogGrid& grid, const RadialOptions& opt) {
  LogGridSolution sol{grid, VectorXd::Constant(grid.size(), spec.c),
                      VectorXd::Constant(grid.size(), spec.c), spec.c, 0, 0.0, {}};
  if (spec.trivial()) {
    sol.iterations = 1;
    sol.sup_step = 0.0;
    sol.step_history = {0.0};
    return sol;
  }
  const RadialOperator F(spec, grid, opt.quad_rel_tol);
  for (int it = 1; it <= opt.max_iter; ++it) {
    auto [y_new, z_new] = F(sol.y, sol.z);
    const double step = std::max((y_new - sol.y).cwiseAbs().maxCoeff(),
                                 (z_new - sol.z).cwiseAbs().maxCoeff());
    sol.y = std::move(y_new);
    sol.z = std::move(z_new);
    sol.iterations = it;
    sol.sup_step = step;
    sol.step_history.push_back(step);
    if (step <= opt.picard_tol) return sol;
  }
  std::string ratios;
  const auto& hist = sol.step_history;
  for (std::size_t k = hist.size() >= 4 ? hist.size() - 3 : 1; k < hist.size(); ++k) {
    ratios += " " + fmt(hist[k] / hist[k - 1]);
  }
  throw NoConvergence("Picard iteration stopped at sup step " + fmt(sol.sup_step) + " > " +
                      fmt(opt.picard_tol) + " after " + std::to_string(opt.max_iter) +
                      " iterations; recent contraction ratios:" + ratios);
}

}  // namespace

LogGridSolution solve_radial(const ProblemSpec& spec, const ThresholdResult& threshold,
                             const RadialOptions& opt) {
  spec.validate();
  if (!spec.radial()) throw ContractViolation("solve_radial needs radial coefficients");
  if (!(opt.picard_tol > 0.0)) throw ContractViolation("picard_tol must be positive");
  if (opt.max_iter < 1) throw ContractViolation("max_iter must be positive");
  if (opt.s_span && !(*opt.s_span > 0.0)) throw ContractViolation("S_span must be positive");

  const double span = opt.s_span ? *opt.s_span
                                 : auto_span(spec, threshold.T, opt.picard_tol, opt.quad_rel_tol);
  const double S_max = threshold.T + span;
  double T = threshold.T;
  for (int attempt = 0; attempt < 8; ++attempt) {
    LogGridSolution sol = picard(spec, LogGrid(T, S_max, opt.n), opt);
    Index last_bad = -1;
    for (Index i = 0; i < sol.y.size(); ++i) {
      if (!(sol.y[i] > 0.0) || !(sol.z[i] > 0.0)) last_bad = i;
    }
    if (last_bad < 0) return sol;
    if (last_bad + 1 >= sol.y.size()) break;
    T = sol.grid.node(last_bad + 1);
  }
  throw NoConvergence("could not find a start point with a strictly positive solution");
}

LogGridSolution solve_radial(const ProblemSpec& spec, const RadialOptions& opt) {
  return solve_radial(spec, compute_threshold(spec, opt.quad_rel_tol), opt);
}

double k_membership_margin(const LogGridSolution& sol) {
  const double c = sol.c;
  const double dy = (sol.y.array() - c).abs().maxCoeff();
  const double dz = (sol.z.array() - c).abs().maxCoeff();
  return c - std::max(dy, dz);
}

RadialTable to_physical(const LogGridSolution& sol) {
  return {sol.grid.nodes().unaryExpr([](double s) { return std::exp(s); }), sol.y, sol.z};
}

std::pair<double, double> residual_radial(const LogGridSolution& sol, const ProblemSpec& spec) {
  const LogGrid& g = sol.grid;
  const Index n = g.size();
  if (n < 3) throw ContractViolation("residual_radial needs at least 3 nodes");
  const double h2 = g.step() * g.step();
  double res_y = 0.0;
  double res_z = 0.0;
  for (Index i = 1; i + 1 < n; ++i) {
    const double s = g.node(i);
    const double ypp = (sol.y[i - 1] - 2.0 * sol.y[i] + sol.y[i + 1]) / h2;
    const double zpp = (sol.z[i - 1] - 2.0 * sol.z[i] + sol.z[i + 1]) / h2;
    res_y = std::max(res_y, std::abs(ypp + spec.p.log_density(s) * std::pow(sol.z[i], spec.alpha)));
    res_z = std::max(res_z, std::abs(zpp + spec.q.log_density(s) * std::pow(sol.y[i], spec.beta)));
  }
  return {res_y, res_z};
}

double interpolate(const LogGrid& grid, const VectorXd& values, double s) {
  const Index n = grid.size();
  if (!(s >= grid.T() - 1e-12 && s <= grid.S_max() + 1e-12)) {
    throw ContractViolation("interpolate: s outside the grid");
  }
  const double h = grid.step();
  const double x = (s - grid.T()) / h;
  const Index base = std::clamp<Index>(static_cast<Index>(std::floor(x)) - 1, 0, n - 4);
  double result = 0.0;
  for (Index a = 0; a < 4; ++a) {
    double basis = 1.0;
    for (Index b = 0; b < 4; ++b) {
      if (b != a) basis *= (x - static_cast<double>(base + b)) / static_cast<double>(a - b);
    }
    result += basis * values[base + a];
  }
  return result;
}

}  // namespace lef
