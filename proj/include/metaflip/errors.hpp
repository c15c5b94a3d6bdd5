#pragma once

#include <stdexcept>
#include <string>

namespace metaflip {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition or type invariant was violated by the caller's input.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

class NotPositiveSemidefinite : public ContractViolation {
 public:
  using ContractViolation::ContractViolation;
};

class DimensionMismatch : public ContractViolation {
 public:
  using ContractViolation::ContractViolation;
};

class UnknownLabel : public ContractViolation {
 public:
  using ContractViolation::ContractViolation;
};

/// Input file could not be parsed; `line()` is 1-based, 0 when not applicable.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A numerical procedure left its domain of validity (grid leakage,
/// quadrature non-convergence).
class NumericalDomainError : public Error {
 public:
  using Error::Error;
};

}  // namespace metaflip
