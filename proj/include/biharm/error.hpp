#pragma once

#include <stdexcept>
#include <string>

namespace biharm {

/// Failure categories. The CLI maps each one to a fixed exit code.
enum class ErrorKind {
  Usage,            // malformed command line or manifest
  Domain,           // argument outside the mathematical domain of a function
  Validation,       // parameter tuple violates an invariant
  BracketFailure,   // shooting scan found no sign change
  NonConvergence,   // iteration limit reached
  Regime,           // inputs outside the regime an algorithm supports
  NoExplicitSolution,
  BlowUp,           // ODE solution escaped the blow-up threshold
  StepUnderflow,
  TailNonConvergence,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::Usage: return "usage";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::BracketFailure: return "bracket-failure";
    case ErrorKind::NonConvergence: return "non-convergence";
    case ErrorKind::Regime: return "regime";
    case ErrorKind::NoExplicitSolution: return "no-explicit-solution";
    case ErrorKind::BlowUp: return "blow-up";
    case ErrorKind::StepUnderflow: return "step-underflow";
    case ErrorKind::TailNonConvergence: return "tail-nonconvergence";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised by the integrator; carries the time at which the event happened.
class IntegrationError : public Error {
 public:
  IntegrationError(ErrorKind kind, double t, const std::string& what)
      : Error(kind, what), t_(t) {}

  [[nodiscard]] double time() const noexcept { return t_; }

 private:
  double t_;
};

}  // namespace biharm
