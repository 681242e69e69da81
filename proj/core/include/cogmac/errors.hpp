#pragma once

#include <stdexcept>
#include <string>

namespace cogmac {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain where a formula is defined.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A configuration or parameter set violates a documented invariant.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Vectors that must be parallel have different lengths.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A posterior probability has a zero denominator, i.e. the evidence is
/// impossible under the sensing model.
class IndeterminatePosterior : public Error {
 public:
  using Error::Error;
};

/// No point satisfies the interference constraints.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// An iterative numerical method hit its iteration cap.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace cogmac
