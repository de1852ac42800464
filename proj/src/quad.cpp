#include "lef/quad.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "lef/errors.hpp"

namespace lef {

namespace {

constexpr int kSimpsonIntervals = 128;  // 129-node base rule
constexpr int kDivergencePanels = 8;
constexpr int kQuietPanels = 3;
// Panels stop before e^s or r leave the comfortable double range.
constexpr double kMaxRadius = 1e200;
const double kMaxLogSpan = std::log(kMaxRadius);

void check_rel_tol(double rel_tol) {
  if (!(rel_tol > 1e-14 && rel_tol < 1e-2)) {
    throw ContractViolation("rel_tol must lie in (1e-14, 1e-2), got " + std::to_string(rel_tol));
  }
}

// Simpson sums at spacings 4h, 2h and h from one set of 4 * 128 + 1
// samples, Richardson-extrapolated at the two finer levels.  The panel is
// bisected until those extrapolations agree.
template <class F>
double adaptive_panel(const F& f, double a, double b, double rel_tol, int depth) {
  constexpr int n = 4 * kSimpsonIntervals;
  const double h = (b - a) / n;
  std::vector<double> y(n + 1);
  for (int i = 0; i <= n; ++i) y[i] = f(i == n ? b : a + i * h);
  auto simpson = [&](int stride) {
    double odd = 0.0;
    double even = 0.0;
    for (int i = stride; i < n; i += stride) ((i / stride) % 2 ? odd : even) += y[i];
    return stride * h / 3.0 * (y[0] + y[n] + 4.0 * odd + 2.0 * even);
  };
  const double whole = simpson(4);
  const double halves = simpson(2);
  const double quarters = simpson(1);
  const double coarse = halves + (halves - whole) / 15.0;
  const double fine = quarters + (quarters - halves) / 15.0;
  if (std::abs(fine - coarse) <= rel_tol * std::max(std::abs(fine), kAbsFloor) || depth >= 8 ||
      !std::isfinite(fine)) {
    return fine;
  }
  const double m = 0.5 * (a + b);
  return adaptive_panel(f, a, m, rel_tol, depth + 1) + adaptive_panel(f, m, b, rel_tol, depth + 1);
}

// Integrates f over [edge(0), inf) panel by panel, where edge(k) is the left
// end of panel k.  Panel contributions are assumed to decay geometrically
// once small; the remainder is extrapolated from the last decay ratio.
template <class F, class Edge>
TailIntegralResult panel_integrate(const F& f, const Edge& edge, double limit, double rel_tol,
                                   const std::string& what) {
  check_rel_tol(rel_tol);
  TailIntegralResult out;
  double running = 0.0;
  double prev = -1.0;
  int quiet = 0;
  int rising = 0;
  for (int k = 0;; ++k) {
    const double a = edge(k);
    const double b = edge(k + 1);
    if (!(b <= limit)) break;

    const double contrib = adaptive_panel(f, a, b, 0.1 * rel_tol, 0);
    if (!std::isfinite(contrib)) throw NonIntegrable(what + ": non-finite panel contribution");
    running += contrib;
    out.truncation_point = b;

    if (prev >= 0.0 && contrib > 0.0 && contrib >= prev) {
      if (++rising >= kDivergencePanels) {
        throw NonIntegrable(what + ": panel contributions non-decreasing over " +
                            std::to_string(kDivergencePanels) + " panels ending at " +
                            std::to_string(b));
      }
    } else {
      rising = 0;
    }

    double tail = std::numeric_limits<double>::infinity();
    if (contrib == 0.0) {
      tail = 0.0;
    } else if (prev > 0.0 && contrib < prev) {
      const double ratio = contrib / prev;
      tail = contrib * ratio / (1.0 - ratio);
    }
    prev = contrib;

    quiet = (contrib <= rel_tol * std::max(running, kAbsFloor)) ? quiet + 1 : 0;
    out.tail_bound = tail;
    out.value = running + (std::isfinite(tail) ? tail : 0.0);
    if (quiet >= kQuietPanels && tail <= rel_tol * std::max(out.value, kAbsFloor)) {
      out.converged = true;
      return out;
    }
  }
  out.value = running + (std::isfinite(out.tail_bound) ? out.tail_bound : 0.0);
  out.converged = false;
  return out;
}

TailIntegralResult log_panels(const CoefficientField& field, double start, double rel_tol,
                              double (*weight)(double s, double start), const std::string& what) {
  if (!field.radial()) throw ContractViolation(what + " requires a radial field");
  if (!std::isfinite(start)) throw ContractViolation(what + ": start must be finite");
  const double width = std::numbers::ln2;
  auto edge = [&](int k) { return start + k * width; };
  auto f = [&](double s) { return weight(s, start) * field.log_density(s); };
  return panel_integrate(f, edge, start + kMaxLogSpan, rel_tol, what);
}

// --- independent nested route: adaptive Gauss-Kronrod (7, 15) -------------

constexpr double kXgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                            0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                            0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                            0.207784955007898467600689403773245, 0.0};
constexpr double kWgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                            0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                            0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                            0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct GkPiece {
  double a, b, value, error;
};

template <class G>
GkPiece gk15(const G& g, double a, double b) {
  const double centre = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = g(centre);
  double kronrod = kWgk[7] * fc;
  double gauss = kWg[3] * fc;
  for (int i = 0; i < 7; ++i) {
    const double dx = half * kXgk[i];
    const double sum = g(centre - dx) + g(centre + dx);
    kronrod += kWgk[i] * sum;
    if (i % 2 == 1) gauss += kWg[i / 2] * sum;
  }
  return {a, b, kronrod * half, std::abs((kronrod - gauss) * half)};
}

// \int_start^\infty f(s) ds through s = start + x / (1 - x), x in [0, 1).
template <class F>
double gk_tail(const F& f, double start, double rel_tol) {
  auto g = [&](double x) {
    const double one_minus = 1.0 - x;
    const double s = start + x / one_minus;
    const double v = f(s);
    return v == 0.0 ? 0.0 : v / (one_minus * one_minus);
  };
  std::vector<GkPiece> pieces{gk15(g, 0.0, 1.0)};
  constexpr std::size_t kMaxPieces = 4000;
  for (;;) {
    double total = 0.0;
    double error = 0.0;
    for (const GkPiece& p : pieces) {
      total += p.value;
      error += p.error;
    }
    if (!std::isfinite(total)) throw NonIntegrable("nested quadrature produced a non-finite value");
    if (error <= rel_tol * std::max(std::abs(total), kAbsFloor) || pieces.size() >= kMaxPieces) {
      return total;
    }
    auto worst = std::max_element(pieces.begin(), pieces.end(),
                                  [](const GkPiece& l, const GkPiece& r) { return l.error < r.error; });
    const GkPiece w = *worst;
    const double mid = 0.5 * (w.a + w.b);
    *worst = gk15(g, w.a, mid);
    pieces.push_back(gk15(g, mid, w.b));
  }
}

}  // namespace

TailIntegralResult weighted_log_integral(const CoefficientField& field, double lower,
                                         double rel_tol) {
  if (!field.radial()) {
    throw ContractViolation("weighted_log_integral requires a radial field (use its majorant)");
  }
  if (!(lower >= 1.0) || !std::isfinite(lower)) {
    throw ContractViolation("weighted_log_integral: lower limit must be >= 1");
  }
  auto edge = [&](int k) { return std::ldexp(lower, k); };
  auto f = [&](double s) { return s * eval_coeff(field, s, 0.0) * std::log(s); };
  return panel_integrate(f, edge, kMaxRadius, rel_tol,
                         "weighted log integral of " + field.describe());
}

TailIntegralResult psi(const CoefficientField& field, double T, double rel_tol) {
  return log_panels(
      field, T, rel_tol, [](double s, double start) { return s - start; },
      "Psi of " + field.describe());
}

TailIntegralResult inner_tail(const CoefficientField& field, double S, double rel_tol) {
  return log_panels(
      field, S, rel_tol, [](double, double) { return 1.0; },
      "tail mass of " + field.describe());
}

TailIntegralResult log_variable_moment(const CoefficientField& field, double lower,
                                       double rel_tol) {
  return log_panels(
      field, lower, rel_tol, [](double s, double) { return s; },
      "log-variable moment of " + field.describe());
}

double psi_nested(const CoefficientField& field, double T, double rel_tol) {
  if (!field.radial()) throw ContractViolation("psi_nested requires a radial field");
  auto density = [&](double s) { return field.log_density(s); };
  auto inner = [&](double t) { return gk_tail(density, t, rel_tol); };
  return gk_tail(inner, T, rel_tol);
}

double fubini_identity_check(const CoefficientField& field, double T, double rel_tol) {
  const double single = psi(field, T, rel_tol).value;
  const double nested = psi_nested(field, T, 0.1 * rel_tol);
  return std::abs(nested - single) / std::max(single, kAbsFloor);
}

double ip_tail(const CoefficientField& field, double r, double rel_tol) {
  return weighted_log_integral(field, r, rel_tol).value;
}

std::vector<double> ip_tail_many(const CoefficientField& field, const std::vector<double>& radii,
                                 double rel_tol) {
  std::vector<double> out(radii.size());
  if (radii.empty()) return out;
  for (std::size_t k = 1; k < radii.size(); ++k) {
    if (!(radii[k] > radii[k - 1])) throw ContractViolation("ip_tail_many: radii must increase");
  }
  auto g = [&](double s) { return s * field.log_density(s); };
  // s w(s) over [a, b], bisected until the Kronrod-Gauss gap is small
  auto segment = [&](auto&& self, double a, double b, int depth) -> double {
    const GkPiece piece = gk15(g, a, b);
    if (piece.error <= 0.1 * rel_tol * std::max(std::abs(piece.value), kAbsFloor) || depth >= 30) {
      return piece.value;
    }
    const double m = 0.5 * (a + b);
    return self(self, a, m, depth + 1) + self(self, m, b, depth + 1);
  };
  out.back() = ip_tail(field, radii.back(), rel_tol);
  for (std::size_t k = radii.size() - 1; k-- > 0;) {
    out[k] = out[k + 1] + segment(segment, std::log(radii[k]), std::log(radii[k + 1]), 0);
  }
  return out;
}

}  // namespace lef
