#pragma once

#include <stdexcept>
#include <string>

namespace modwalk {

/// A model or distribution whose parameters violate a documented precondition.
class InvalidModel : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of an operation (e.g. u not in (0,1)).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Linear-algebra or iteration failure.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A finite grid or window cannot represent the requested quantity.
class CoverageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Too few regeneration cycles or replications for the requested estimator.
class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Simulation hit its step cap on too many replications.
class InconclusiveRun : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace modwalk
