#pragma once

#include <vector>

#include "lef/coeff.hpp"

namespace lef {

/// Floor used to make relative tolerances total when integrands vanish.
inline constexpr double kAbsFloor = 1e-300;

struct TailIntegralResult {
  double value = 0.0;             // includes the extrapolated tail
  double truncation_point = 0.0;  // end of the last panel actually integrated
  double tail_bound = 0.0;        // geometric extrapolation of what lies beyond
  bool converged = false;
};

/// \int_lower^\infty s p(s) ln(s) ds.
///
/// Panels [lower 2^k, lower 2^{k+1}] are integrated with 129-node composite
/// Simpson.  Throws NonIntegrable once panel contributions fail to decrease
/// for 8 consecutive panels.
TailIntegralResult weighted_log_integral(const CoefficientField& field, double lower,
                                         double rel_tol);

/// Psi(T) = \int_T^\infty \int_t^\infty e^{2s} p(e^s) ds dt, evaluated through
/// the single integral \int_T^\infty (s - T) e^{2s} p(e^s) ds.
TailIntegralResult psi(const CoefficientField& field, double T, double rel_tol);

/// \int_S^\infty e^{2s} p(e^s) ds, the inner tail mass beyond S.
TailIntegralResult inner_tail(const CoefficientField& field, double S, double rel_tol);

/// \int_{lower}^\infty s e^{2s} p(e^s) ds; the log-variable image of
/// weighted_log_integral(field, e^lower).
TailIntegralResult log_variable_moment(const CoefficientField& field, double lower,
                                       double rel_tol);

/// Relative gap between a nested double quadrature of Psi(T) and the
/// single-integral form.  The nested side uses adaptive Gauss-Kronrod on a
/// compactified interval, independent of the Simpson panels.
double fubini_identity_check(const CoefficientField& field, double T, double rel_tol);

/// Psi(T) by nested Gauss-Kronrod quadrature (the double-integral side of
/// fubini_identity_check).
double psi_nested(const CoefficientField& field, double T, double rel_tol);

/// I_p(r) = \int_r^\infty rho p(rho) ln(rho) d rho.
double ip_tail(const CoefficientField& field, double r, double rel_tol);

/// ip_tail at increasing radii: one tail integral from the largest radius,
/// then Gauss-Kronrod pieces between neighbours accumulated inward.
std::vector<double> ip_tail_many(const CoefficientField& field, const std::vector<double>& radii,
                                 double rel_tol);

}  // namespace lef
