#pragma once

#include <stdexcept>
#include <string>

namespace beamnf {

// Base of every library error. The CLI maps families to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Out-of-range numeric parameter (q, m, gamma, r, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Mode cutoffs that do not match.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Input outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Enumeration or degree budget exceeded.
class BudgetError : public Error {
 public:
  using Error::Error;
};

// A normal form step whose smallness gate failed without override.
class StepRejected : public Error {
 public:
  using Error::Error;
};

// Adaptive flow could not make progress (step size underflow).
class FlowDomainError : public Error {
 public:
  using Error::Error;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

// Non-finite state during time stepping; carries the last finite time.
class BlowUpError : public Error {
 public:
  BlowUpError(const std::string& what, double last_time)
      : Error(what), last_time_(last_time) {}
  double last_time() const { return last_time_; }

 private:
  double last_time_;
};

}  // namespace beamnf
