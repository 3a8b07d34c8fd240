#pragma once

#include <stdexcept>
#include <string>

namespace drpi {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vector/matrix sizes disagree with the owning model.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A precondition on a scalar argument (dt, epsilon, counts, ...) failed.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A NaN or infinity showed up where only finite values are allowed.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

/// No scalar theta makes theta * G R^-1 G^T equal to Sigma Sigma^T.
class NoLinearizingTheta : public Error {
 public:
  using Error::Error;
};

/// theta sits on or below the pole of the effective-temperature transform.
class SingularTheta : public Error {
 public:
  using Error::Error;
};

/// G_c R^-1 G_c^T is numerically singular.
class SingularProjection : public Error {
 public:
  using Error::Error;
};

/// The risk-sensitive Riccati recursion left its domain (value is +inf).
class RiskBreakdown : public Error {
 public:
  using Error::Error;
};

/// Bad experiment configuration; the message names the offending key.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace drpi
