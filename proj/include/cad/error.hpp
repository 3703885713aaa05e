#pragma once

#include <stdexcept>

namespace cad {

// Base of every error raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Incompatible tensor extents.
struct ShapeError : Error {
  using Error::Error;
};

// A point outside the mathematical domain of an operation (log 0, w = 0 in
// division, the abs adjoint at the origin, relu of a complex value, ...).
struct DomainError : Error {
  using Error::Error;
};

// A forward value that is NaN or infinite.
struct NumericError : Error {
  using Error::Error;
};

struct SingularMatrixError : Error {
  using Error::Error;
};

// The backward pass was asked to differentiate something that is not a real
// scalar.
struct InvalidLossError : Error {
  using Error::Error;
};

// Gradient requested for a node that is not a registered variable.
struct LookupError : Error {
  using Error::Error;
};

// Bad arguments: zero dimensions, empty sequences, non-positive step sizes.
struct InvalidInputError : Error {
  using Error::Error;
};

}  // namespace cad
