#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "lef/errors.hpp"
#include "lef/quad.hpp"
#include "lef/radial.hpp"

using Eigen::VectorXd;
using lef::CoefficientField;
using lef::LogGrid;
using lef::ProblemSpec;

namespace {

const double kLn2 = std::numbers::ln2;

ProblemSpec coupled4() {
  return {0.3, 0.2, 1.0, 1.0, CoefficientField::power(1, 4), CoefficientField::power(1, 4)};
}

ProblemSpec decoupled4() {
  return {0.3, 0.2, 1.0, 1.0, CoefficientField::power(1, 4), CoefficientField::zero()};
}

lef::RadialOptions opts(Eigen::Index n, double span, double tol = 1e-10) {
  lef::RadialOptions o;
  o.n = n;
  o.s_span = span;
  o.picard_tol = tol;
  return o;
}

// Piecewise-linear random function with values in [0, 2c] at `knots` breakpoints.
VectorXd random_member(const LogGrid& g, double c, int knots, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 2.0 * c);
  std::vector<double> v(knots + 1);
  for (double& x : v) x = u(rng);
  VectorXd out(g.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const double t = static_cast<double>(i) / (g.size() - 1) * knots;
    const int k = std::min(static_cast<int>(t), knots - 1);
    out[i] = std::clamp(v[k] + (t - k) * (v[k + 1] - v[k]), 0.0, 2.0 * c);
  }
  return out;
}

double sup(const VectorXd& v) { return v.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("LogGrid") {
  const LogGrid g(kLn2, kLn2 + 10.0, 65);
  CHECK(g.node(0) == kLn2);
  CHECK(g.node(64) == kLn2 + 10.0);
  CHECK(g.step() == doctest::Approx(10.0 / 64.0));
  CHECK_THROWS_AS(LogGrid(0.0, 1.0, 64), lef::ContractViolation);
  CHECK_THROWS_AS(LogGrid(1.0, 1.0, 65), lef::ContractViolation);
}

TEST_CASE("cumulative tail integral is exact for cubics") {
  const double h = 0.01;
  VectorXd f(101), exact(101);
  auto F = [](double s) { return s * s * s * s / 4.0 - s * s + 0.5 * s; };  // antiderivative
  for (int i = 0; i <= 100; ++i) {
    const double s = i * h;
    f[i] = s * s * s - 2.0 * s + 0.5;
    exact[i] = F(1.0) - F(s);
  }
  CHECK(sup(lef::cumulative_tail_integral(f, h) - exact) < 1e-13);
}

TEST_CASE("apply_F closed forms") {
  const LogGrid g(kLn2, kLn2 + 10.0, 2561);  // h < 1/256
  const VectorXd one = VectorXd::Ones(g.size());
  VectorXd expected(g.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) expected[i] = 1.0 - std::exp(-2.0 * g.node(i)) / 4.0;

  SUBCASE("zero data") {
    ProblemSpec zero{0.3, 0.2, 1.5, 1.0, CoefficientField::zero(), CoefficientField::zero()};
    std::mt19937_64 rng(3);
    auto [y, z] = lef::apply_F(zero, g, random_member(g, 1.5, 7, rng), random_member(g, 1.5, 7, rng));
    CHECK(sup(y.array() - 1.5) == 0.0);
    CHECK(sup(z.array() - 1.5) == 0.0);
  }
  SUBCASE("decoupled, z = 1") {
    auto [y, z] = lef::apply_F(decoupled4(), g, one, one);
    CHECK(sup(y - expected) <= 1e-8);
    CHECK(sup(z - one) == 0.0);
  }
  SUBCASE("coupled first step from (c, c)") {
    auto [y, z] = lef::apply_F(coupled4(), g, one, one);
    CHECK(sup(y - expected) <= 1e-8);
    CHECK(sup(z - expected) <= 1e-8);
  }
  SUBCASE("inputs outside K") {
    VectorXd bad = one;
    bad[5] = 2.5;
    CHECK_THROWS_AS(lef::apply_F(coupled4(), g, bad, one), lef::ContractViolation);
    bad[5] = -0.1;
    CHECK_THROWS_AS(lef::apply_F(coupled4(), g, one, bad), lef::ContractViolation);
  }
}

TEST_CASE("F maps K into K and is continuous") {
  const ProblemSpec spec = coupled4();
  const LogGrid g(kLn2, kLn2 + 10.0, 513);
  const lef::RadialOperator F(spec, g);
  std::mt19937_64 rng(20240611);
  double worst = INFINITY;
  for (int m = 0; m < 1000; ++m) {
    auto [y, z] = F(random_member(g, 1.0, 1 + m % 40, rng), random_member(g, 1.0, 1 + m % 40, rng));
    worst = std::min({worst, 1.0 - sup(y.array() - 1.0), 1.0 - sup(z.array() - 1.0)});
  }
  CHECK(worst >= -1e-12);

  // omega(d) = max(d^alpha, d^beta) c (1 + 2^{alpha+beta})^{-1} 2
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const double factor = 2.0 / spec.invariance_factor();
  for (int m = 0; m < 100; ++m) {
    const VectorXd y = random_member(g, 1.0, 9, rng);
    const VectorXd z = random_member(g, 1.0, 9, rng);
    const double d = 0.1 * std::abs(unit(rng));
    VectorXd y2 = y, z2 = z;
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      y2[i] = std::clamp(y[i] + d * unit(rng), 0.0, 2.0);
      z2[i] = std::clamp(z[i] + d * unit(rng), 0.0, 2.0);
    }
    const double dist = std::max(sup(y2 - y), sup(z2 - z));
    auto [fy, fz] = F(y, z);
    auto [fy2, fz2] = F(y2, z2);
    const double image = std::max(sup(fy2 - fy), sup(fz2 - fz));
    CHECK(image <= std::max(std::pow(dist, spec.alpha), std::pow(dist, spec.beta)) * factor + 1e-14);
  }
}

TEST_CASE("trivial problem") {
  ProblemSpec zero{0.3, 0.2, 2.0, 1.0, CoefficientField::zero(), CoefficientField::zero()};
  const auto sol = lef::solve_radial(zero, opts(257, 10.0));
  CHECK(sol.iterations == 1);
  CHECK(sup(sol.y.array() - 2.0) == 0.0);
  CHECK(lef::k_membership_margin(sol) == 2.0);
  const auto [ry, rz] = lef::residual_radial(sol, zero);
  CHECK(ry == 0.0);
  CHECK(rz == 0.0);
}

TEST_CASE("decoupled closed form") {
  const ProblemSpec spec = decoupled4();
  const auto sol = lef::solve_radial(spec, opts(4097, 10.0));
  CHECK(sol.grid.T() == doctest::Approx(kLn2).epsilon(1e-12));
  CHECK(sol.iterations <= 3);
  CHECK(sol.sup_step <= 1e-10);
  const auto tab = lef::to_physical(sol);
  CHECK(tab.r[0] == doctest::Approx(2.0).epsilon(1e-12));
  double err = 0.0;
  for (Eigen::Index i = 0; i < tab.r.size(); ++i) {
    CHECK(tab.r[i] == std::exp(sol.grid.node(i)));
    err = std::max(err, std::abs(tab.u[i] - (1.0 - 0.25 / (tab.r[i] * tab.r[i]))));
  }
  CHECK(err <= 1e-6);
  CHECK(std::abs(tab.u[0] - 0.9375) <= 1e-6);
  CHECK(sup(sol.z.array() - 1.0) == 0.0);
  CHECK(lef::k_membership_margin(sol) == doctest::Approx(15.0 / 16.0).epsilon(1e-9));
  const auto [ry, rz] = lef::residual_radial(sol, spec);
  CHECK(ry <= 1e-4);
  CHECK(rz == 0.0);
}

TEST_CASE("coupled solve: invariants") {
  const ProblemSpec spec = coupled4();
  lef::RadialOptions o;
  o.picard_tol = 1e-12;
  const auto sol = lef::solve_radial(spec, o);
  const double c = spec.c;
  CHECK(sol.sup_step <= 1e-12);
  for (std::size_t k = 2; k + 1 < sol.step_history.size(); ++k) {
    CHECK(sol.step_history[k + 1] <= sol.step_history[k]);
  }
  CHECK(sol.y.minCoeff() > 0.0);
  CHECK(sol.z.minCoeff() > 0.0);
  for (Eigen::Index i = 1; i < sol.y.size(); ++i) {
    CHECK(sol.y[i] >= sol.y[i - 1] - 1e-14);
    CHECK(sol.z[i] >= sol.z[i - 1] - 1e-14);
  }
  // margin against the bound chain c - 2^alpha c^alpha Psi(T) >= c - 2^alpha c / (1 + 2^{a+b})
  const double psi_T = lef::psi(spec.p, sol.grid.T(), 1e-12).value;
  const double chain = c - std::pow(2.0 * c, spec.alpha) * psi_T;
  CHECK(chain >= c - std::pow(2.0, spec.alpha) * c / spec.invariance_factor());
  CHECK(lef::k_membership_margin(sol) >= chain - 1e-12);
  // limit at the end of the grid
  const double psi_end = lef::psi(spec.p, sol.grid.S_max(), 1e-12).value;
  const auto last = sol.y.size() - 1;
  CHECK(c - sol.y[last] <= std::pow(2.0 * c, spec.alpha) * psi_end + 1e-12);
  CHECK(c - sol.z[last] <= std::pow(2.0 * c, spec.beta) * psi_end + 1e-12);
}

TEST_CASE("residual quarters under grid doubling") {
  const ProblemSpec spec = coupled4();
  const auto coarse = lef::solve_radial(spec, opts(1025, 10.0, 1e-13));
  const auto fine = lef::solve_radial(spec, opts(2049, 10.0, 1e-13));
  const double ratio = lef::residual_radial(coarse, spec).first / lef::residual_radial(fine, spec).first;
  CHECK(ratio == doctest::Approx(4.0).epsilon(0.2));
}

TEST_CASE("random power and log-power configurations stay in K") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    const double alpha = 0.05 + 0.5 * u(rng);
    const double beta = (0.95 - alpha) * (0.1 + 0.8 * u(rng));
    const double c = 1.0 + 3.0 * u(rng);
    const double A = 0.2 + 4.0 * u(rng);
    auto field = [&]() {
      const double C = 0.1 + 20.0 * u(rng);
      const double sigma = 2.5 + 3.0 * u(rng);
      return k % 2 ? CoefficientField::power(C, sigma)
                   : CoefficientField::log_power(C, sigma, 2.0 * u(rng) - 0.5);
    };
    ProblemSpec spec{alpha, beta, c, A, field(), field()};
    lef::RadialOptions o;
    o.n = 1025;
    const auto sol = lef::solve_radial(spec, o);
    CAPTURE(k);
    CHECK(lef::k_membership_margin(sol) >= 0.0);
    CHECK(sol.y.minCoeff() > 0.0);
    CHECK(sol.z.minCoeff() > 0.0);
  }
}

TEST_CASE("iteration cap") {
  lef::RadialOptions o;
  o.max_iter = 1;
  o.n = 257;
  CHECK_THROWS_AS(lef::solve_radial(coupled4(), o), lef::NoConvergence);
}

TEST_CASE("interpolate reproduces cubics") {
  const LogGrid g(0.0, 2.0, 65);
  VectorXd v(g.size());
  auto f = [](double s) { return 1.0 - s + 0.5 * s * s - 0.25 * s * s * s; };
  for (Eigen::Index i = 0; i < g.size(); ++i) v[i] = f(g.node(i));
  for (double s : {0.0, 0.013, 0.5, 1.234, 1.99, 2.0}) {
    CHECK(lef::interpolate(g, v, s) == doctest::Approx(f(s)).epsilon(1e-13));
  }
}
