#include "lef/asympt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "lef/errors.hpp"
#include "lef/quad.hpp"

namespace lef {

using Eigen::Index;
using Eigen::VectorXd;

BoundCheck bound_check(const LogGridSolution& sol) {
  BoundCheck out;
  out.sup_u = sol.y.cwiseAbs().maxCoeff();
  out.sup_v = sol.z.cwiseAbs().maxCoeff();
  out.M_measured = out.sup_u + out.sup_v;
  out.within_bound = out.sup_u <= 2.0 * sol.c && out.sup_v <= 2.0 * sol.c &&
                     sol.y.minCoeff() >= 0.0 && sol.z.minCoeff() >= 0.0;
  return out;
}

LimitCheck limit_check(const LogGridSolution& sol, const ProblemSpec& spec, double tail_tol,
                       double rel_tol) {
  const Index last = sol.y.size() - 1;
  const double S = sol.grid.S_max();
  LimitCheck out;
  out.dev_u_end = std::abs(sol.y[last] - sol.c);
  out.dev_v_end = std::abs(sol.z[last] - sol.c);
  out.bound_u = std::pow(2.0 * spec.c, spec.alpha) * psi(spec.p, S, rel_tol).value + tail_tol;
  out.bound_v = std::pow(2.0 * spec.c, spec.beta) * psi(spec.q, S, rel_tol).value + tail_tol;
  out.within_bound = out.dev_u_end <= out.bound_u && out.dev_v_end <= out.bound_v;
  return out;
}

double least_squares_slope(const VectorXd& xs, const VectorXd& ys) {
  const double mx = xs.mean();
  const double my = ys.mean();
  const VectorXd dx = xs.array() - mx;
  return dx.dot(ys - VectorXd::Constant(ys.size(), my)) / dx.squaredNorm();
}

DecayReport decay_fit(const LogGridSolution& sol, const ProblemSpec& spec,
                      const DecayOptions& opt) {
  const LogGrid& g = sol.grid;
  const double c = sol.c;
  const double r_first = std::exp(g.T());
  const double r_last = std::exp(g.S_max());

  double lo = 2.0 * r_first;
  double hi = r_last / 4.0;
  const bool automatic = !opt.window.has_value();
  if (!automatic) std::tie(lo, hi) = *opt.window;
  if (!(lo < hi) || lo < r_first || hi > r_last) {
    throw WindowTooFar("decay window [" + std::to_string(lo) + ", " + std::to_string(hi) +
                       "] is not inside the solution domain");
  }

  std::vector<Index> picked;
  for (Index i = 0; i < g.size(); ++i) {
    const double r = std::exp(g.node(i));
    if (r < lo || r > hi) continue;
    const bool loud = c - sol.y[i] > opt.noise_floor || c - sol.z[i] > opt.noise_floor;
    if (!loud && automatic) break;  // deviations only shrink further out
    picked.push_back(i);
  }

  const Index m = static_cast<Index>(picked.size());
  DecayReport rep;
  rep.sample_radii.resize(m);
  rep.deviations_u.resize(m);
  rep.deviations_v.resize(m);
  rep.ip_values.resize(m);
  rep.iq_values.resize(m);
  std::vector<double> radii(static_cast<std::size_t>(m));
  for (Index k = 0; k < m; ++k) {
    const Index i = picked[k];
    radii[k] = std::exp(g.node(i));
    rep.sample_radii[k] = radii[k];
    rep.deviations_u[k] = c - sol.y[i];
    rep.deviations_v[k] = c - sol.z[i];
  }
  const std::vector<double> ip = ip_tail_many(spec.p, radii, opt.rel_tol);
  const std::vector<double> iq = ip_tail_many(spec.q, radii, opt.rel_tol);
  rep.ip_values = Eigen::Map<const VectorXd>(ip.data(), m);
  rep.iq_values = Eigen::Map<const VectorXd>(iq.data(), m);
  rep.window_lo = m > 0 ? rep.sample_radii[0] : lo;
  rep.window_hi = m > 0 ? rep.sample_radii[m - 1] : hi;

  // Each component is fitted on the radii where its deviation clears the
  // noise floor; a component with too few such radii is reported as NaN.
  const double nan = std::numeric_limits<double>::quiet_NaN();
  auto fit = [&](const VectorXd& dev, const VectorXd& tail, double& slope, double& constant) {
    std::vector<Index> use;
    for (Index k = 0; k < m; ++k) {
      if (dev[k] > opt.noise_floor && tail[k] > 0.0) use.push_back(k);
    }
    slope = constant = nan;
    if (use.size() < 16) return false;
    VectorXd lx(use.size()), ly(use.size());
    constant = 0.0;
    for (std::size_t k = 0; k < use.size(); ++k) {
      lx[k] = std::log(tail[use[k]]);
      ly[k] = std::log(dev[use[k]]);
      constant = std::max(constant, dev[use[k]] / tail[use[k]]);
    }
    slope = least_squares_slope(lx, ly);
    return true;
  };
  const bool fit_u = fit(rep.deviations_u, rep.ip_values, rep.fitted_exponent_u, rep.bound_constant_u);
  const bool fit_v = fit(rep.deviations_v, rep.iq_values, rep.fitted_exponent_v, rep.bound_constant_v);
  if (!fit_u && !fit_v) {
    throw WindowTooFar("fewer than 16 radii in [" + std::to_string(lo) + ", " +
                       std::to_string(hi) +
                       "] have deviations above the noise floor; choose smaller radii");
  }
  rep.claimed_exponent_u = 1.0 / (1.0 - spec.beta);
  rep.claimed_exponent_v = 1.0 / (1.0 - spec.alpha);
  return rep;
}

}  // namespace lef
