#pragma once

#include <stdexcept>
#include <string>

namespace nsldp {

/// Operands live on different Galerkin lattices, or an array has the wrong size.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of an operation (negative time, bad exponent).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A time integration produced NaN or exceeded the blowup threshold.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, double time)
      : std::runtime_error(what + " at t=" + std::to_string(time)), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// A parameter constraint was violated; `constraint()` names the inequality.
class ValidationError : public std::invalid_argument {
 public:
  ValidationError(const std::string& constraint, const std::string& detail)
      : std::invalid_argument("constraint violated: " + constraint + " (" + detail + ")"),
        constraint_(constraint) {}
  const std::string& constraint() const noexcept { return constraint_; }

 private:
  std::string constraint_;
};

/// The requested tail tolerance of a lattice sum cannot be met at the given cutoff.
class TailToleranceError : public std::runtime_error {
 public:
  TailToleranceError(const std::string& what, int required_cutoff)
      : std::runtime_error(what + "; required cutoff " + std::to_string(required_cutoff)),
        required_cutoff_(required_cutoff) {}
  int required_cutoff() const noexcept { return required_cutoff_; }

 private:
  int required_cutoff_;
};

}  // namespace nsldp
