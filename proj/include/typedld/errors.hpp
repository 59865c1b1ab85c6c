#pragma once

#include <stdexcept>
#include <string>

namespace typedld {

/// A caller violated a documented precondition (e.g. a zero type weight).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed text or JSON input. Carries the offending line when known.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// A condition spec whose integrality or capacity bounds fail.
class InadmissibleSpec : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Exhaustive enumeration refused because the support is too large.
class EnumerationGuardError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Empty constraint polytope; `what()` carries the phase-1 certificate.
class InfeasibleConstraints : public std::domain_error {
 public:
  InfeasibleConstraints(const std::string& what, double infeasibility)
      : std::domain_error(what), infeasibility_(infeasibility) {}
  /// Minimal total constraint violation found by the phase-1 program.
  double infeasibility() const noexcept { return infeasibility_; }

 private:
  double infeasibility_;
};

}  // namespace typedld
