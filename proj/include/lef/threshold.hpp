#pragma once

#include "lef/problem.hpp"

namespace lef {

struct ThresholdResult {
  double T;           // start of the log-variable domain
  double B_c;         // e^T, inner radius of the solution domain
  double psi_p_at_T;
  double psi_q_at_T;
  double margin;      // c - (1 + 2^{alpha+beta}) max(psi_p, psi_q)
};

/// Smallest T >= ln(A+1), up to a bisection width of 1e-10, such that
/// (1 + 2^{alpha+beta}) Psi(T) <= c holds for both p and q.
///
/// Requires radial coefficients (pass spec.majorized() otherwise).
ThresholdResult compute_threshold(const ProblemSpec& spec, double rel_tol);

}  // namespace lef
