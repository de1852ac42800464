#pragma once

#include "lef/coeff.hpp"

namespace lef {

/// -Lap u = p v^alpha, -Lap v = q u^beta on |x| > A, with u, v -> c.
struct ProblemSpec {
  double alpha;
  double beta;
  double c;
  double A;
  CoefficientField p;
  CoefficientField q;

  /// Throws ContractViolation unless alpha, beta > 0, alpha + beta < 1,
  /// c >= 1 and A > 0.
  void validate() const;

  /// 1 + 2^{alpha+beta}, the invariance constant of the fixed-point set.
  double invariance_factor() const;

  /// Same exponents and data with p, q replaced by their radial majorants.
  ProblemSpec majorized(int samples = kDefaultMajorantSamples) const;

  bool radial() const { return p.radial() && q.radial(); }
  bool trivial() const { return p.identically_zero() && q.identically_zero(); }
};

}  // namespace lef
