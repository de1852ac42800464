#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "lef/expr.hpp"

namespace lef {

inline constexpr int kDefaultMajorantSamples = 4096;

/// A nonnegative coefficient p(r, theta) on the exterior domain.
///
/// Fields are either builtin families with analytically known tails or
/// parsed expressions.  Values are immutable and cheap to copy.
class CoefficientField {
 public:
  /// C * r^-sigma
  struct Power {
    double C;
    double sigma;
  };
  /// C * r^-sigma * ln(e + r)^-tau
  struct LogPower {
    double C;
    double sigma;
    double tau;
  };
  /// radial base * (a + b cos(k theta)), a > |b|
  struct Modulated {
    std::shared_ptr<const CoefficientField> base;
    double a;
    double b;
    int k;
  };
  struct Expression {
    std::shared_ptr<const ExprTree> tree;
    std::string source;
  };
  /// max over `samples` equally spaced angles of the wrapped field
  struct Majorant {
    std::shared_ptr<const CoefficientField> base;
    int samples;
    std::shared_ptr<const CircleSampler> sampler;  // set for expression bases
  };

  using Definition = std::variant<Power, LogPower, Modulated, Expression, Majorant>;

  static CoefficientField zero() { return power(0.0, 0.0); }
  static CoefficientField power(double C, double sigma);
  static CoefficientField log_power(double C, double sigma, double tau);
  static CoefficientField modulated(const CoefficientField& base, double a, double b, int k);
  static CoefficientField expression(std::string_view source);
  static CoefficientField majorant_of(const CoefficientField& field,
                                      int samples = kDefaultMajorantSamples);

  /// Parses either an expression or a builtin spelled as
  /// `@power(C, sigma)`, `@logpower(C, sigma, tau)` or
  /// `@modulated(a, b, k, <radial builtin>)`.
  static CoefficientField parse(std::string_view text);

  const Definition& definition() const { return def_; }
  bool radial() const { return radial_; }
  bool identically_zero() const;

  /// Declared Hoelder exponent; carried along, never used in computation.
  std::optional<double> holder_exponent() const { return holder_; }
  CoefficientField with_holder_exponent(double lambda) const;

  /// p(r, theta) without the sign check performed by eval_coeff.
  double raw(double r, double theta) const;

  /// e^{2s} p(e^s) for radial fields, evaluated without overflow for the
  /// builtin families.  This is the weight of the log-variable system.
  double log_density(double s) const;

  std::string describe() const;

 private:
  explicit CoefficientField(Definition def, bool radial) : def_(std::move(def)), radial_(radial) {}

  Definition def_;
  bool radial_;
  std::optional<double> holder_;
};

/// p(r, theta); throws CoefficientError if the value is negative or not finite.
double eval_coeff(const CoefficientField& field, double r, double theta);

/// max of eval_coeff over `n_theta` angles 2*pi*j/n_theta.  Doubling
/// n_theta nests the sample set, so refinement never decreases the value.
double radial_majorant(const CoefficientField& field, double r, int n_theta);

}  // namespace lef
