#pragma once

#include <stdexcept>
#include <string>

namespace symdyn {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller violated an operation's precondition (bad window, mismatched
/// alphabets, malformed input text).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// An enumeration or allocation would exceed a configured cap.
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// A representation does not allow an exact verdict (e.g. a period that is
/// not a multiple of the block length).
class UndecidableRepresentation : public Error {
 public:
  using Error::Error;
};

/// The Laurent matrix is not invertible in the l1 algebra; `witness_theta`
/// is an angle on the unit circle where the symbol (nearly) vanishes.
class NonInvertible : public Error {
 public:
  NonInvertible(const std::string& what, double theta, double magnitude)
      : Error(what), witness_theta(theta), witness_magnitude(magnitude) {}
  double witness_theta;
  double witness_magnitude;
};

/// An l1 inverse could not be certified to the requested residual.
class NotCertified : public Error {
 public:
  using Error::Error;
};

/// A numeric step of the tracing algorithm lost its margin (ambiguous
/// integer rounding, violated compatibility hypothesis).
class NumericMargin : public Error {
 public:
  using Error::Error;
};

}  // namespace symdyn
