#pragma once

#include <stdexcept>
#include <string>

namespace vhcplan {

/// A caller violated a documented precondition (bad argument, out-of-domain
/// query, degenerate parameters).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A model evaluator returned data violating a model invariant, e.g. a mass
/// matrix that is not symmetric positive definite or a rank-deficient input
/// map.
class ModelInvariantError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical procedure failed: integration blew up, an iteration did not
/// converge, or an inversion left the region where it is defined.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The linearized transverse system is not controllable over one period.
class UncontrollableError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace vhcplan
