#pragma once

#include <stdexcept>
#include <string>

namespace previewctl {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inconsistent dimensions, malformed data, or plant assumptions violated.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A documented precondition (e.g. a Schur system) does not hold.
class PreconditionViolated : public Error {
 public:
  using Error::Error;
};

class DivergingSimulation : public Error {
 public:
  using Error::Error;
};

class SingularResolvent : public Error {
 public:
  using Error::Error;
};

/// The Riccati equation has no stabilizing solution (pencil eigenvalues on
/// the unit circle, wrong stable-subspace dimension, or no accurate solve).
class NoStabilizingSolution : public Error {
 public:
  using Error::Error;
};

/// R + B'XB is singular at the computed solution.
class DegeneratePencil : public Error {
 public:
  using Error::Error;
};

class SynthesisFailure : public Error {
 public:
  using Error::Error;
};

class FactorizationFailure : public Error {
 public:
  using Error::Error;
};

/// The FIR order cannot reach the requested spectral-factor accuracy.
class OrderTooSmall : public Error {
 public:
  using Error::Error;
};

class ResourceLimit : public Error {
 public:
  using Error::Error;
};

class BoundUnavailable : public Error {
 public:
  using Error::Error;
};

}  // namespace previewctl
