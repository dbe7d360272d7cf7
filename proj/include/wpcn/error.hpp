#pragma once

#include <stdexcept>
#include <string>

namespace wpcn {

/// Base class of every error thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of a function.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Result would overflow a double; use a log-domain formulation.
class OverflowError : public Error {
 public:
  using Error::Error;
};

/// Instance violates a model invariant (nonpositive gain, zero demand, ...).
class InvalidInstance : public Error {
 public:
  using Error::Error;
};

/// No time allocation satisfies the requested constraint.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// Completion-time line does not meet the V-curve.
class NoIntersectionError : public InfeasibleError {
 public:
  using InfeasibleError::InfeasibleError;
};

/// Vector length or problem size mismatch.
class SizeError : public Error {
 public:
  using Error::Error;
};

/// Iterative method exhausted its budget before meeting its tolerance.
class NonConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace wpcn
