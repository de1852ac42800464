#pragma once

#include <stdexcept>
#include <string>

namespace lef {

// Every failure raised by the library carries a stable, machine-readable
// category; the CLI maps categories onto exit statuses.
class Error : public std::runtime_error {
 public:
  Error(std::string category, const std::string& what)
      : std::runtime_error(what), category_(std::move(category)) {}
  const std::string& category() const noexcept { return category_; }

 private:
  std::string category_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : Error("ParseError", what + " at position " + std::to_string(position)),
        position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

class CoefficientError : public Error {
 public:
  explicit CoefficientError(const std::string& what) : Error("CoefficientError", what) {}
};

class NonIntegrable : public Error {
 public:
  explicit NonIntegrable(const std::string& what) : Error("NonIntegrable", what) {}
};

class NoConvergence : public Error {
 public:
  explicit NoConvergence(const std::string& what) : Error("NoConvergence", what) {}
};

class LinearSolveFailure : public Error {
 public:
  explicit LinearSolveFailure(const std::string& what) : Error("LinearSolveFailure", what) {}
};

class MaxPrincipleViolation : public Error {
 public:
  explicit MaxPrincipleViolation(const std::string& what)
      : Error("MaxPrincipleViolation", what) {}
};

class WindowTooFar : public Error {
 public:
  explicit WindowTooFar(const std::string& what) : Error("WindowTooFar", what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error("ConfigError", what) {}
};

/// Raised when a caller breaks an operation's precondition (bad sizes,
/// inputs outside the admissible set, invalid exponents).
class ContractViolation : public Error {
 public:
  explicit ContractViolation(const std::string& what) : Error("ContractViolation", what) {}
};

}  // namespace lef
