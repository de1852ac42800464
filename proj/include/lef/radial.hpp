#pragma once

#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "lef/problem.hpp"
#include "lef/threshold.hpp"

namespace lef {

/// Uniform grid s_i = T + i h on [T, S_max] in the log variable s = ln r.
class LogGrid {
 public:
  LogGrid(double T, double S_max, Eigen::Index n);

  double T() const { return T_; }
  double S_max() const { return S_max_; }
  Eigen::Index size() const { return n_; }
  double step() const { return (S_max_ - T_) / static_cast<double>(n_ - 1); }
  double node(Eigen::Index i) const { return i + 1 == n_ ? S_max_ : T_ + i * step(); }
  Eigen::VectorXd nodes() const;

 private:
  double T_;
  double S_max_;
  Eigen::Index n_;
};

struct LogGridSolution {
  LogGrid grid;
  Eigen::VectorXd y;
  Eigen::VectorXd z;
  double c;
  int iterations = 0;
  double sup_step = 0.0;
  std::vector<double> step_history;  // sup-norm Picard update per iteration
};

struct RadialOptions {
  Eigen::Index n = 4097;
  /// S_max - T.  When unset: the smallest span >= 10 (in unit steps) with
  /// Psi(S_max) <= picard_tol / 10 for both coefficients.
  std::optional<double> s_span;
  double picard_tol = 1e-10;
  int max_iter = 200;
  double quad_rel_tol = 1e-12;
};

/// The integral operator F on a fixed grid.  Weights e^{2s} p(e^s) and the
/// tail integrals beyond S_max are computed once at construction.
///
///   F1(y, z)(s) = c - \int_s^\infty \int_t^\infty e^{2k} p(e^k) z^alpha(k) dk dt
///
/// Beyond S_max the iterate is frozen at its last node value, so the tails
/// reduce to z(S_max)^alpha times \int_S^\infty w and Psi(S_max).
class RadialOperator {
 public:
  RadialOperator(const ProblemSpec& spec, const LogGrid& grid, double quad_rel_tol = 1e-12);

  /// (y, z) must lie in K = {|y - c| <= c, |z - c| <= c}.
  std::pair<Eigen::VectorXd, Eigen::VectorXd> operator()(const Eigen::VectorXd& y,
                                                         const Eigen::VectorXd& z) const;

  const LogGrid& grid() const { return grid_; }
  const Eigen::VectorXd& weight_p() const { return wp_; }
  const Eigen::VectorXd& weight_q() const { return wq_; }
  double psi_p_at_end() const { return psi_p_end_; }
  double psi_q_at_end() const { return psi_q_end_; }

 private:
  ProblemSpec spec_;
  LogGrid grid_;
  Eigen::VectorXd wp_, wq_;
  double mass_p_end_, mass_q_end_;  // \int_{S_max}^\infty w
  double psi_p_end_, psi_q_end_;

  Eigen::VectorXd deficit(const Eigen::VectorXd& weight, const Eigen::VectorXd& other,
                          double exponent, double mass_end, double psi_end) const;
};

/// \int_{s_i}^{S_max} f ds for every node, fourth-order accurate
/// (cubic-interpolation panel rule, accumulated right to left).
Eigen::VectorXd cumulative_tail_integral(const Eigen::VectorXd& f, double h);

std::pair<Eigen::VectorXd, Eigen::VectorXd> apply_F(const ProblemSpec& spec, const LogGrid& grid,
                                                    const Eigen::VectorXd& y,
                                                    const Eigen::VectorXd& z);

/// Picard iteration of F from (c, c) on [T, T + span].  If the converged
/// pair is not strictly positive the domain start is moved to the first
/// node beyond which it is, and the solve is repeated.
LogGridSolution solve_radial(const ProblemSpec& spec, const ThresholdResult& threshold,
                             const RadialOptions& options = {});
LogGridSolution solve_radial(const ProblemSpec& spec, const RadialOptions& options = {});

/// min over nodes of c - |y - c| and c - |z - c|.
double k_membership_margin(const LogGridSolution& sol);

struct RadialTable {
  Eigen::VectorXd r, u, v;
};
RadialTable to_physical(const LogGridSolution& sol);

/// sup over interior nodes of |y'' + e^{2s} p(e^s) z^alpha| (three-point
/// second difference), and the same for z.
std::pair<double, double> residual_radial(const LogGridSolution& sol, const ProblemSpec& spec);

/// Value of a grid function at arbitrary s in [T, S_max] by four-point
/// Lagrange interpolation.
double interpolate(const LogGrid& grid, const Eigen::VectorXd& values, double s);

}  // namespace lef
