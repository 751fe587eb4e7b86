#pragma once

#include <stdexcept>
#include <string>

namespace lcms {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed expression text or configuration syntax.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A variable that the chart does not declare, or an evaluation point that
/// leaves a free variable unassigned.
class VariableError : public Error {
 public:
  using Error::Error;
};

/// Evaluation outside the domain of an expression (0^-1, non-finite result),
/// or a construction outside the supported expression class.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Operands that live on different charts.
class ChartMismatch : public Error {
 public:
  using Error::Error;
};

/// Input data that violates a documented precondition (non-closed Lee form,
/// Hamiltonian depending on the energy coordinate, degree mismatch, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Integration aborted because the state became non-finite or blew up.
class NumericAbort : public Error {
 public:
  using Error::Error;
};

}  // namespace lcms
