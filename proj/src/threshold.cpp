#include "lef/threshold.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lef/errors.hpp"
#include "lef/quad.hpp"

namespace lef {

void ProblemSpec::validate() const {
  if (!(alpha > 0.0) || !(beta > 0.0)) throw ContractViolation("alpha and beta must be positive");
  if (!(alpha + beta < 1.0)) throw ContractViolation("alpha+beta must be < 1");
  if (!(c >= 1.0) || !std::isfinite(c)) throw ContractViolation("c must be >= 1");
  if (!(A > 0.0) || !std::isfinite(A)) throw ContractViolation("A must be positive");
}

double ProblemSpec::invariance_factor() const { return 1.0 + std::pow(2.0, alpha + beta); }

ProblemSpec ProblemSpec::majorized(int samples) const {
  ProblemSpec out = *this;
  out.p = CoefficientField::majorant_of(p, samples);
  out.q = CoefficientField::majorant_of(q, samples);
  return out;
}

namespace {

constexpr double kBisectionWidth = 1e-10;
constexpr int kMaxDoublings = 60;

// Smallest T >= lower with factor * Psi(T) <= c, for one coefficient.
double smallest_admissible(const CoefficientField& field, double lower, double factor, double c,
                           double rel_tol) {
  auto admissible = [&](double T) { return factor * psi(field, T, rel_tol).value <= c; };
  if (admissible(lower)) return lower;

  double lo = lower;
  double step = 1.0;
  double hi = lower + step;
  int doublings = 0;
  while (!admissible(hi)) {
    if (++doublings > kMaxDoublings) {
      throw NoConvergence("threshold bracketing failed for " + field.describe() +
                          " after " + std::to_string(kMaxDoublings) + " doublings");
    }
    lo = hi;
    step *= 2.0;
    hi = lower + step;
  }
  while (hi - lo > kBisectionWidth) {
    const double mid = 0.5 * (lo + hi);
    (admissible(mid) ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace

ThresholdResult compute_threshold(const ProblemSpec& spec, double rel_tol) {
  spec.validate();
  if (!spec.radial()) {
    throw ContractViolation("compute_threshold needs radial coefficients; majorize first");
  }
  const double lower = std::log(spec.A + 1.0);
  // Integrability of both coefficients (hypothesis on s p(s) ln s).
  weighted_log_integral(spec.p, spec.A + 1.0, rel_tol);
  weighted_log_integral(spec.q, spec.A + 1.0, rel_tol);

  const double factor = spec.invariance_factor();
  const double Tp = smallest_admissible(spec.p, lower, factor, spec.c, rel_tol);
  const double Tq = smallest_admissible(spec.q, lower, factor, spec.c, rel_tol);

  ThresholdResult out;
  out.T = std::max({lower, Tp, Tq});
  out.B_c = (out.T == lower) ? spec.A + 1.0 : std::exp(out.T);
  out.psi_p_at_T = psi(spec.p, out.T, rel_tol).value;
  out.psi_q_at_T = psi(spec.q, out.T, rel_tol).value;
  out.margin = spec.c - factor * std::max(out.psi_p_at_T, out.psi_q_at_T);
  return out;
}

}  // namespace lef
