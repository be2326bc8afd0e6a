#pragma once

#include <stdexcept>
#include <string>

namespace hopfcone {

/// Input rejected: a precondition or type invariant does not hold.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An iterative method hit its iteration cap or search radius.
class SolverCapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hopfcone
