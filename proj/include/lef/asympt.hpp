#pragma once

#include <optional>
#include <utility>

#include <Eigen/Core>

#include "lef/problem.hpp"
#include "lef/radial.hpp"

namespace lef {

struct BoundCheck {
  double sup_u;       // ||u||_inf over the grid
  double sup_v;
  double M_measured;  // sup_u + sup_v
  bool within_bound;  // each factor <= 2c (and hence the sum <= 4c)
};

/// Uniform bound: 0 <= u, v <= 2c from K-membership.
BoundCheck bound_check(const LogGridSolution& sol);

struct LimitCheck {
  double dev_u_end;  // |u(S_max) - c|
  double dev_v_end;
  double bound_u;    // 2^alpha c^alpha Psi_p(S_max) + tail_tol
  double bound_v;
  bool within_bound;
};

LimitCheck limit_check(const LogGridSolution& sol, const ProblemSpec& spec, double tail_tol,
                       double rel_tol = 1e-12);

struct DecayReport {
  Eigen::VectorXd sample_radii;
  Eigen::VectorXd deviations_u, deviations_v;
  Eigen::VectorXd ip_values, iq_values;
  double fitted_exponent_u, fitted_exponent_v;  // slope of log dev against log I
  double bound_constant_u, bound_constant_v;    // max of dev / I over the window
  double claimed_exponent_u, claimed_exponent_v;  // 1/(1-beta), 1/(1-alpha), reported only
  double window_lo, window_hi;
};

struct DecayOptions {
  /// Explicit window; when absent it is [2 B_c, r(S_max)/4] cut back to
  /// where both deviations stay above the noise floor.
  std::optional<std::pair<double, double>> window;
  double noise_floor = 1e-8;  // 100 x the Picard tolerance by default
  double rel_tol = 1e-12;
};

/// Least-squares decay exponents of |u - c| against I_p and |v - c| against
/// I_q.  A component with fewer than 16 window radii above the noise floor
/// gets NaN; WindowTooFar is thrown when both do.
DecayReport decay_fit(const LogGridSolution& sol, const ProblemSpec& spec,
                      const DecayOptions& options = {});

/// Least-squares slope of ys against xs.
double least_squares_slope(const Eigen::VectorXd& xs, const Eigen::VectorXd& ys);

}  // namespace lef
