#pragma once

#include <stdexcept>
#include <string>

namespace dhym {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (bad grid size, non-PD metric, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// The total phase left the admissible window (theta_guard, pi - theta_guard).
class PhaseSingular : public Error {
 public:
  using Error::Error;
};

/// theta0 = Arg Z is not in (0, pi).
class NotSupercritical : public Error {
 public:
  using Error::Error;
};

/// |theta0 - theta| reached pi/2 somewhere, where tan(theta0 - theta) is undefined.
class TlpfRangeViolation : public Error {
 public:
  using Error::Error;
};

/// A NaN or infinity appeared in a field.
class NonFinite : public Error {
 public:
  using Error::Error;
};

class EigenSolveError : public Error {
 public:
  using Error::Error;
};

class SnapshotFormatError : public Error {
 public:
  using Error::Error;
};

/// Configuration parse/validation failure; the message names the offending key.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace dhym
