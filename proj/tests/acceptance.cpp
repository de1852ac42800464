// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fail.
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lef/annulus.hpp"
#include "lef/asympt.hpp"
#include "lef/errors.hpp"
#include "lef/quad.hpp"
#include "lef/radial.hpp"
#include "lef/threshold.hpp"

namespace fs = std::filesystem;
using Eigen::Index;
using Eigen::VectorXd;
using lef::CoefficientField;
using lef::ProblemSpec;

namespace {

const double kLn2 = std::numbers::ln2;

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }
double sup(const VectorXd& v) { return v.cwiseAbs().maxCoeff(); }

// Criterion 10 collects every solved configuration.
struct BoundLedger {
  double worst = -INFINITY;  // max of ||u||/2c and ||v||/2c
  int solves = 0;
  void record(const VectorXd& u, const VectorXd& v, double c) {
    worst = std::max({worst, sup(u) / (2 * c), sup(v) / (2 * c)});
    ++solves;
  }
  void record(const Eigen::MatrixXd& u, const Eigen::MatrixXd& v, double c) {
    worst = std::max({worst, u.cwiseAbs().maxCoeff() / (2 * c), v.cwiseAbs().maxCoeff() / (2 * c)});
    ++solves;
  }
} ledger;

lef::LogGridSolution solve(const ProblemSpec& spec, lef::RadialOptions o) {
  auto sol = lef::solve_radial(spec, o);
  ledger.record(sol.y, sol.z, spec.c);
  return sol;
}

lef::RadialOptions options(Index n, std::optional<double> span, double tol = 1e-10) {
  lef::RadialOptions o;
  o.n = n;
  o.s_span = span;
  o.picard_tol = tol;
  return o;
}

ProblemSpec spec_of(double c, const CoefficientField& p, const CoefficientField& q) {
  return {0.3, 0.2, c, 1.0, p, q};
}

const CoefficientField kR4 = CoefficientField::power(1, 4);

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char b[64];
  std::snprintf(b, sizeof b, f, a);
  return b;
}

// --- 1 --------------------------------------------------------------------
Outcome integrability() {
  const double exact = kLn2 / 8.0 + 1.0 / 16.0;
  const double value = lef::weighted_log_integral(kR4, 2.0, 1e-10).value;
  bool raised = false;
  try {
    lef::weighted_log_integral(CoefficientField::power(1, 2), 2.0, 1e-10);
  } catch (const lef::NonIntegrable&) {
    raised = true;
  }
  const double e = rel(value, exact);
  return {e <= 1e-8 && raised,
          "rel err " + fmt("%.2e", e) + " (<= 1e-8), r^-2 NonIntegrable: " + (raised ? "yes" : "no")};
}

// --- 2 --------------------------------------------------------------------
Outcome fubini() {
  double worst = 0.0;
  for (double T : {0.0, kLn2, 2.0}) {
    const double nested = lef::psi_nested(kR4, T, 1e-11);
    const double single = lef::psi(kR4, T, 1e-11).value;
    worst = std::max(worst, rel(nested, single));
  }
  const double at0 = rel(lef::psi(kR4, 0.0, 1e-11).value, 0.25);
  return {worst <= 1e-7 && at0 <= 1e-8,
          "nested vs single " + fmt("%.2e", worst) + " (<= 1e-7), Psi(0) vs 1/4 " + fmt("%.2e", at0) +
              " (<= 1e-8)"};
}

// --- 3 --------------------------------------------------------------------
Outcome threshold() {
  const ProblemSpec spec = spec_of(1.0, kR4, kR4);
  const auto th = lef::compute_threshold(spec, 1e-12);
  const double product = (1.0 + std::pow(2.0, 0.5)) * th.psi_p_at_T;
  const bool ok = std::abs(th.T - kLn2) <= 1e-9 && std::abs(th.B_c - 2.0) <= 2e-9 &&
                  std::abs(product - 2.41421356237309505 / 16.0) <= 1e-9 && product <= 1.0 &&
                  th.margin >= 0.84 - 0.01;
  return {ok, "T - ln2 = " + fmt("%.1e", th.T - kLn2) + ", B_c - 2 = " + fmt("%.1e", th.B_c - 2.0) +
                  ", (1+2^0.5) Psi = " + fmt("%.10f", product) + ", margin " + fmt("%.4f", th.margin)};
}

// --- 4 --------------------------------------------------------------------
Outcome decoupled() {
  const ProblemSpec spec = spec_of(1.0, kR4, CoefficientField::zero());
  const auto sol = solve(spec, options(4097, 10.0));
  double err = 0.0;
  for (Index i = 0; i < sol.y.size(); ++i) {
    err = std::max(err, std::abs(sol.y[i] - (1.0 - std::exp(-2.0 * sol.grid.node(i)) / 4.0)));
  }
  const double u2 = sol.y[0];
  const double res = lef::residual_radial(sol, spec).first;
  const auto fine = solve(spec, options(8193, 10.0));
  const double ratio = res / lef::residual_radial(fine, spec).first;
  const bool ok = err <= 1e-6 && std::abs(u2 - 0.9375) <= 1e-6 && res <= 1e-4 &&
                  std::abs(ratio - 4.0) <= 0.3 * 4.0;
  return {ok, "sup err " + fmt("%.2e", err) + ", u(2) = " + fmt("%.9f", u2) + ", res_y " +
                  fmt("%.2e", res) + ", doubling ratio " + fmt("%.3f", ratio) + " (4 +- 30%)"};
}

// --- 5 --------------------------------------------------------------------
VectorXd random_member(Index n, double c, int knots, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 2.0 * c);
  std::vector<double> v(knots + 1);
  for (double& x : v) x = u(rng);
  VectorXd out(n);
  for (Index i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / (n - 1) * knots;
    const int k = std::min(static_cast<int>(t), knots - 1);
    out[i] = v[k] + (t - k) * (v[k + 1] - v[k]);
  }
  return out;
}

Outcome k_invariance() {
  const ProblemSpec spec = spec_of(1.0, kR4, kR4);
  const lef::LogGrid grid(kLn2, kLn2 + 12.0, 1025);
  const lef::RadialOperator F(spec, grid);
  std::mt19937_64 rng(5);
  double worst = INFINITY;
  for (int m = 0; m < 1000; ++m) {
    const int knots = 1 + m % 64;
    auto [y, z] = F(random_member(grid.size(), 1.0, knots, rng), random_member(grid.size(), 1.0, knots, rng));
    worst = std::min({worst, 1.0 - sup(y.array() - 1.0), 1.0 - sup(z.array() - 1.0)});
  }
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double config_margin = INFINITY;
  for (int k = 0; k < 20; ++k) {
    const double alpha = 0.05 + 0.6 * u(rng);
    const double beta = (0.95 - alpha) * (0.05 + 0.9 * u(rng));
    const double c = 1.0 + 4.0 * u(rng);
    const double A = 0.1 + 5.0 * u(rng);
    auto field = [&]() {
      const double C = 0.05 + 30.0 * u(rng);
      const double sigma = 2.2 + 4.0 * u(rng);
      return u(rng) < 0.5 ? CoefficientField::power(C, sigma)
                          : CoefficientField::log_power(C, sigma, 3.0 * u(rng) - 1.0);
    };
    ProblemSpec s{alpha, beta, c, A, field(), field()};
    const auto sol = solve(s, options(2049, std::nullopt));
    config_margin = std::min(config_margin, lef::k_membership_margin(sol) / c);
  }
  return {worst >= -1e-12 && config_margin >= 0.0,
          "random members: min margin " + fmt("%.3e", worst) + " (>= -1e-12); 20 configs: min margin/c " +
              fmt("%.3e", config_margin) + " (>= 0)"};
}

// --- 6 --------------------------------------------------------------------
// Independent fine-grid Picard oracle: trapezoid cumulative sums, weight
// e^{-2s} for p = q = r^-4, tails closed with the frozen end value.
struct Oracle {
  VectorXd y, z;
};

Oracle picard_oracle(double alpha, double beta, double c, double T, double S, Index n, double tol) {
  const double h = (S - T) / static_cast<double>(n - 1);
  VectorXd s(n), w(n);
  for (Index i = 0; i < n; ++i) {
    s[i] = i + 1 == n ? S : T + h * i;
    w[i] = std::exp(-2.0 * s[i]);
  }
  auto tail_sum = [&](const VectorXd& f) {  // \int_{s_i}^{S} f, trapezoid
    VectorXd out(n);
    out[n - 1] = 0.0;
    for (Index i = n - 1; i-- > 0;) out[i] = out[i + 1] + 0.5 * h * (f[i] + f[i + 1]);
    return out;
  };
  auto image = [&](const VectorXd& other, double e) {
    const VectorXd f = w.array() * other.array().pow(e);
    const double frozen = std::pow(other[n - 1], e);
    const double mass_end = frozen * std::exp(-2.0 * S) / 2.0;
    const double psi_end = frozen * std::exp(-2.0 * S) / 4.0;
    const VectorXd inner = tail_sum(f).array() + mass_end;
    return VectorXd((c - (tail_sum(inner).array() + psi_end)).matrix());
  };
  Oracle o{VectorXd::Constant(n, c), VectorXd::Constant(n, c)};
  for (int it = 0; it < 500; ++it) {
    VectorXd y = image(o.z, alpha);
    VectorXd z = image(o.y, beta);
    const double step = std::max(sup(y - o.y), sup(z - o.z));
    o.y = std::move(y);
    o.z = std::move(z);
    if (step <= tol) break;
  }
  return o;
}

Outcome fixed_point_oracle() {
  const ProblemSpec spec = spec_of(1.0, kR4, kR4);
  const auto sol = solve(spec, options(4097, std::nullopt));
  const Index fine_n = (Index{1} << 17) + 1;
  const Oracle o = picard_oracle(0.3, 0.2, 1.0, sol.grid.T(), sol.grid.S_max(), fine_n, 1e-13);
  const Index stride = (fine_n - 1) / (sol.grid.size() - 1);
  double diff = 0.0;
  for (Index i = 0; i < sol.grid.size(); ++i) {
    diff = std::max({diff, std::abs(sol.y[i] - o.y[i * stride]), std::abs(sol.z[i] - o.z[i * stride])});
  }
  return {diff <= 1e-8, "sup |production - oracle| = " + fmt("%.3e", diff) + " (<= 1e-8), oracle n = 2^17 + 1"};
}

// --- 7 --------------------------------------------------------------------
Outcome monotone_iteration() {
  std::string detail;
  bool ok = true;
  for (const char* p : {"r^-4", "(2 + cos(theta)) / r^4"}) {
    const ProblemSpec spec = spec_of(1.0, CoefficientField::parse(p), kR4);
    const ProblemSpec major = spec.majorized();
    const auto radial = solve(major, options(4097, std::nullopt, 1e-12));
    const auto grid = lef::build_annulus_grid(std::exp(radial.grid.T()), 64.0, 257, 64);
    const auto super = lef::radial_supersolution(spec, grid, radial);
    const auto sol = lef::monotone_iterate(spec, grid, super.u, super.v);
    ledger.record(sol.u, sol.v, spec.c);
    const bool sandwich = sol.supersolution_gap >= 0.0 && sol.u.minCoeff() >= 0.0 &&
                          sol.v.minCoeff() >= 0.0;
    bool case_ok = sol.monotonicity_defect >= -1e-10 && sandwich &&
                   std::abs(grid.r_inner() - 2.0) <= 2e-9;
    detail += std::string(spec.p.radial() ? "radial" : "angular") + ": defect " +
              fmt("%.1e", sol.monotonicity_defect) + ", gap " + fmt("%.1e", sol.supersolution_gap);
    if (spec.p.radial()) {
      double worst = 0.0;
      for (Index i = 0; i < grid.n_r(); ++i) {
        const double yr = lef::interpolate(radial.grid, radial.y, std::log(grid.r(i)));
        worst = std::max(worst, (sol.u.row(i).array() - yr).abs().maxCoeff() / yr);
      }
      case_ok = case_ok && worst <= 5e-3;
      detail += ", rel vs radial " + fmt("%.1e", worst) + " (<= 5e-3); ";
    }
    ok = ok && case_ok;
  }
  return {ok, detail};
}

// --- 8 --------------------------------------------------------------------
Outcome poisson() {
  const auto g = lef::build_annulus_grid(2.0, 64.0, 257, 64);
  const double a = 0.25, b = 1.5;
  const auto res = lef::poisson_solve(g, Eigen::MatrixXd::Zero(g.n_r(), g.n_theta()),
                                      VectorXd::Constant(g.n_theta(), a),
                                      VectorXd::Constant(g.n_theta(), b), 1e-10);
  double err = 0.0;
  for (Index i = 0; i < g.n_r(); ++i) {
    const double exact = a + (b - a) * std::log(g.r(i) / 2.0) / std::log(32.0);
    err = std::max(err, (res.w.row(i).array() - exact).abs().maxCoeff());
  }
  return {err <= 1e-6, "max err vs log-harmonic profile " + fmt("%.2e", err) + " (<= 1e-6)"};
}

// --- 9 --------------------------------------------------------------------
Outcome asymptotics() {
  const ProblemSpec dec = spec_of(1.0, kR4, CoefficientField::zero());
  const auto sol = solve(dec, options(4097, 10.0));
  lef::DecayOptions o;
  o.window = std::make_pair(4.0, 64.0);
  const auto rep = lef::decay_fit(sol, dec, o);
  double err = 0.0;
  bool decreasing = true;
  for (Index k = 0; k < rep.sample_radii.size(); ++k) {
    const double r = rep.sample_radii[k];
    err = std::max(err, std::abs(rep.deviations_u[k] - 0.25 / (r * r)));
    if (k > 0) {
      decreasing = decreasing && rep.deviations_u[k] / rep.ip_values[k] <
                                     rep.deviations_u[k - 1] / rep.ip_values[k - 1];
    }
  }
  const double end_dev = lef::limit_check(sol, dec, 1e-9).dev_u_end;
  const double exact_end = std::exp(-20.0) / 16.0;
  const bool window_ok = rep.sample_radii.size() >= 16 && rep.sample_radii[0] >= 4.0 &&
                         rep.sample_radii[rep.sample_radii.size() - 1] <= 64.0;

  const ProblemSpec cpl = spec_of(1.0, kR4, kR4);
  const auto csol = solve(cpl, options(4097, std::nullopt));
  const auto crep = lef::decay_fit(csol, cpl);

  const bool ok = window_ok && err <= 1e-8 && std::isfinite(rep.bound_constant_u) && decreasing &&
                  rel(end_dev, exact_end) <= 0.05 && crep.fitted_exponent_u >= 0.9;
  return {ok, "dev err " + fmt("%.2e", err) + " (<= 1e-8), ratio decreasing: " +
                  (decreasing ? "yes" : "no") + ", end dev " + fmt("%.4e", end_dev) + " vs " +
                  fmt("%.4e", exact_end) + "; coupled fitted " + fmt("%.4f", crep.fitted_exponent_u) +
                  " (>= 0.9), claimed 1/(1-beta) = " + fmt("%.4f", crep.claimed_exponent_u) +
                  " reported only"};
}

// --- 11 -------------------------------------------------------------------
std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / ("lef_accept_" + std::to_string(::getpid()));
  fs::remove_all(root);
  fs::create_directories(root);
  const fs::path cfg = root / "run.ini";
  std::ofstream(cfg) << "[problem]\nalpha = 0.3\nbeta = 0.2\nc = 1\nA = 1\np = \"r^-4\"\n"
                        "q = \"(2 + sin(2*theta)) / r^4\"\n\n[annulus]\nr_outer = 32\nn_r = 65\n"
                        "n_theta = 16\n";
  std::size_t compared = 0;
  bool same = true;
  for (const char* command : {"solve-radial", "verify"}) {
    for (const char* run : {"a", "b"}) {
      const std::string cmd = std::string(LEF_CLI_PATH) + " --config '" + cfg.string() +
                              "' --command " + command + " --seed 3 --out '" +
                              (root / (std::string(command) + run)).string() + "' > /dev/null 2>&1";
      const int status = std::system(cmd.c_str());
      if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) return {false, std::string(command) + " failed"};
    }
    for (const auto& e : fs::directory_iterator(root / (std::string(command) + "a"))) {
      same = same && slurp(e.path()) == slurp(root / (std::string(command) + "b") / e.path().filename());
      ++compared;
    }
  }
  fs::remove_all(root);
  return {same && compared >= 4, std::to_string(compared) + " artifacts compared, identical: " + (same ? "yes" : "no")};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {"1 integrability oracle", integrability},
      {"2 Fubini identity", fubini},
      {"3 threshold closed form", threshold},
      {"4 decoupled exact solution", decoupled},
      {"5 K-invariance", k_invariance},
      {"6 coupled fixed point vs oracle", fixed_point_oracle},
      {"7 monotone iteration", monotone_iteration},
      {"8 Poisson oracle", poisson},
      {"9 asymptotics", asymptotics},
      {"10 bound M = 2c", [] {
         return Outcome{ledger.worst <= 1.0, std::to_string(ledger.solves) +
                                                 " solves, max ||.||_inf / 2c = " + fmt("%.6f", ledger.worst)};
       }},
      {"11 determinism", determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("[%s] %-34s %s\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(std::size(criteria)) - failed,
              std::size(criteria));
  return failed == 0 ? 0 : 1;
}
