#pragma once

#include <stdexcept>
#include <string>

namespace contactdyn {

/// Caller broke a documented precondition (bad shape, wrong degree, too few nodes).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A user function returned a non-finite value or could not be evaluated.
class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Requested truncation order exceeds what the solver supports.
class UnsupportedOrder : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input data was well-formed but rejected (CFL, indefinite matrices, bad model parameters).
class Rejected : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace contactdyn
