#include "lef/coeff.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <vector>

#include "lef/errors.hpp"

namespace lef {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string fmt_num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// ln(e + e^s) without overflow for large s.
double log_e_plus_exp(double s) {
  if (s > 1.0) return s + std::log1p(std::exp(1.0 - s));
  return std::log(std::numbers::e + std::exp(s));
}

void require_finite_params(std::initializer_list<double> params, const char* family) {
  for (double p : params) {
    if (!std::isfinite(p)) {
      throw ContractViolation(std::string(family) + ": parameters must be finite");
    }
  }
}

// Recursive reader for the `@name(args...)` builtin syntax.
class BuiltinReader {
 public:
  explicit BuiltinReader(std::string_view text) : text_(text) {}

  CoefficientField read_all() {
    CoefficientField f = read_builtin();
    skip_ws();
    if (pos_ != text_.size()) throw ParseError("trailing characters after builtin", pos_);
    return f;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  void expect(char c) {
    skip_ws();
    if (pos_ >= text_.size() || text_[pos_] != c) {
      throw ParseError(std::string("expected '") + c + "'", pos_);
    }
    ++pos_;
  }

  double read_number() {
    skip_ws();
    const char* begin = text_.data() + pos_;
    double value = 0.0;
    const auto res = std::from_chars(begin, text_.data() + text_.size(), value);
    if (res.ec != std::errc{}) throw ParseError("expected number", pos_);
    pos_ += static_cast<std::size_t>(res.ptr - begin);
    return value;
  }

  CoefficientField read_builtin() {
    expect('@');
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    const std::string name(text_.substr(start, pos_ - start));
    expect('(');
    CoefficientField field = CoefficientField::zero();
    if (name == "power") {
      const double C = read_number();
      expect(',');
      const double sigma = read_number();
      field = CoefficientField::power(C, sigma);
    } else if (name == "logpower") {
      const double C = read_number();
      expect(',');
      const double sigma = read_number();
      expect(',');
      const double tau = read_number();
      field = CoefficientField::log_power(C, sigma, tau);
    } else if (name == "modulated") {
      const double a = read_number();
      expect(',');
      const double b = read_number();
      expect(',');
      const double k = read_number();
      expect(',');
      const CoefficientField base = read_builtin();
      if (k != std::floor(k)) throw ParseError("modulated: k must be an integer", pos_);
      field = CoefficientField::modulated(base, a, b, static_cast<int>(k));
    } else {
      throw ParseError("unknown builtin '" + name + "'", start);
    }
    expect(')');
    return field;
  }
};

}  // namespace

CoefficientField CoefficientField::power(double C, double sigma) {
  require_finite_params({C, sigma}, "power");
  if (C < 0.0) throw ContractViolation("power: C must be nonnegative");
  return CoefficientField(Power{C, sigma}, true);
}

CoefficientField CoefficientField::log_power(double C, double sigma, double tau) {
  require_finite_params({C, sigma, tau}, "logpower");
  if (C < 0.0) throw ContractViolation("logpower: C must be nonnegative");
  return CoefficientField(LogPower{C, sigma, tau}, true);
}

CoefficientField CoefficientField::modulated(const CoefficientField& base, double a, double b,
                                             int k) {
  require_finite_params({a, b}, "modulated");
  if (!base.radial()) throw ContractViolation("modulated: base family must be radial");
  if (!(a > std::abs(b))) throw ContractViolation("modulated: requires a > |b|");
  if (k < 0) throw ContractViolation("modulated: k must be nonnegative");
  const bool radial = (b == 0.0 || k == 0);
  return CoefficientField(Modulated{std::make_shared<const CoefficientField>(base), a, b, k},
                          radial);
}

CoefficientField CoefficientField::expression(std::string_view source) {
  auto tree = std::make_shared<const ExprTree>(parse_expr(source));
  const bool radial = !tree->uses_theta();
  return CoefficientField(Expression{std::move(tree), std::string(source)}, radial);
}

CoefficientField CoefficientField::majorant_of(const CoefficientField& field, int samples) {
  if (samples < 16) throw ContractViolation("majorant needs at least 16 angular samples");
  if (field.radial()) return field;
  std::shared_ptr<const CircleSampler> sampler;
  if (const auto* e = std::get_if<Expression>(&field.def_)) {
    sampler = std::make_shared<const CircleSampler>(e->tree, samples);
  }
  return CoefficientField(
      Majorant{std::make_shared<const CoefficientField>(field), samples, std::move(sampler)}, true);
}

CoefficientField CoefficientField::parse(std::string_view text) {
  std::size_t first = 0;
  while (first < text.size() && std::isspace(static_cast<unsigned char>(text[first]))) ++first;
  if (first < text.size() && text[first] == '@') return BuiltinReader(text).read_all();
  return expression(text);
}

CoefficientField CoefficientField::with_holder_exponent(double lambda) const {
  if (!(lambda > 0.0 && lambda < 1.0)) {
    throw ContractViolation("Hoelder exponent must lie in (0, 1)");
  }
  CoefficientField copy = *this;
  copy.holder_ = lambda;
  return copy;
}

bool CoefficientField::identically_zero() const {
  return std::visit(
      overloaded{
          [](const Power& f) { return f.C == 0.0; },
          [](const LogPower& f) { return f.C == 0.0; },
          [](const Modulated& f) { return f.base->identically_zero(); },
          [](const Expression& f) { return f.tree->is_constant() && f.tree->constant_value() == 0.0; },
          [](const Majorant& f) { return f.base->identically_zero(); },
      },
      def_);
}

double CoefficientField::raw(double r, double theta) const {
  return std::visit(
      overloaded{
          [&](const Power& f) { return f.C == 0.0 ? 0.0 : f.C * std::pow(r, -f.sigma); },
          [&](const LogPower& f) {
            if (f.C == 0.0) return 0.0;
            return f.C * std::pow(r, -f.sigma) * std::pow(std::log(std::numbers::e + r), -f.tau);
          },
          [&](const Modulated& f) {
            return f.base->raw(r, theta) * (f.a + f.b * std::cos(f.k * theta));
          },
          [&](const Expression& f) { return f.tree->evaluate(r, theta); },
          [&](const Majorant& f) {
            if (!f.sampler || !(r > 0.0)) return radial_majorant(*f.base, r, f.samples);
            const Eigen::ArrayXd values = f.sampler->evaluate(r);
            if (!values.isFinite().all() || values.minCoeff() < 0.0) {
              return radial_majorant(*f.base, r, f.samples);
            }
            return values.maxCoeff();
          },
      },
      def_);
}

double CoefficientField::log_density(double s) const {
  if (!radial_) throw ContractViolation("log_density requires a radial field: " + describe());
  return std::visit(
      overloaded{
          [&](const Power& f) { return f.C == 0.0 ? 0.0 : f.C * std::exp((2.0 - f.sigma) * s); },
          [&](const LogPower& f) {
            if (f.C == 0.0) return 0.0;
            return f.C * std::exp((2.0 - f.sigma) * s - f.tau * std::log(log_e_plus_exp(s)));
          },
          [&](const Modulated& f) {
            const double factor = f.a + (f.k == 0 ? f.b : 0.0);
            return f.base->log_density(s) * factor;
          },
          [&](const auto&) {
            const double r = std::exp(s);
            if (!std::isfinite(r)) return 0.0;
            const double p = eval_coeff(*this, r, 0.0);
            if (p == 0.0) return 0.0;
            const double w = (p * r) * r;
            if (!std::isfinite(w)) {
              throw CoefficientError("e^{2s} p(e^s) overflows at s = " + fmt_num(s));
            }
            return w;
          },
      },
      def_);
}

std::string CoefficientField::describe() const {
  return std::visit(
      overloaded{
          [](const Power& f) { return "@power(" + fmt_num(f.C) + ", " + fmt_num(f.sigma) + ")"; },
          [](const LogPower& f) {
            return "@logpower(" + fmt_num(f.C) + ", " + fmt_num(f.sigma) + ", " + fmt_num(f.tau) +
                   ")";
          },
          [](const Modulated& f) {
            return "@modulated(" + fmt_num(f.a) + ", " + fmt_num(f.b) + ", " +
                   std::to_string(f.k) + ", " + f.base->describe() + ")";
          },
          [](const Expression& f) { return f.source; },
          [](const Majorant& f) {
            return "majorant[" + std::to_string(f.samples) + "](" + f.base->describe() + ")";
          },
      },
      def_);
}

double eval_coeff(const CoefficientField& field, double r, double theta) {
  if (!(r > 0.0)) throw ContractViolation("eval_coeff: r must be positive, got " + fmt_num(r));
  const double value = field.raw(r, theta);
  if (!std::isfinite(value) || value < 0.0) {
    throw CoefficientError("coefficient " + field.describe() + " is " + fmt_num(value) +
                           " at r = " + fmt_num(r) + ", theta = " + fmt_num(theta));
  }
  return value;
}

double radial_majorant(const CoefficientField& field, double r, int n_theta) {
  if (n_theta < 16) throw ContractViolation("radial_majorant: n_theta must be >= 16");
  if (field.radial()) return eval_coeff(field, r, 0.0);
  if (!(r > 0.0)) throw ContractViolation("radial_majorant: r must be positive");
  const double step = 2.0 * std::numbers::pi / n_theta;
  if (const auto* e = std::get_if<CoefficientField::Expression>(&field.definition())) {
    const Eigen::ArrayXd theta = Eigen::ArrayXd::LinSpaced(n_theta, 0, n_theta - 1) * step;
    const Eigen::ArrayXd values = e->tree->evaluate_on_circle(r, theta);
    for (int j = 0; j < n_theta; ++j) {
      if (!std::isfinite(values[j]) || values[j] < 0.0) return eval_coeff(field, r, j * step);
    }
    return std::max(0.0, values.maxCoeff());
  }
  double best = 0.0;
  for (int j = 0; j < n_theta; ++j) best = std::max(best, eval_coeff(field, r, j * step));
  return best;
}

}  // namespace lef
