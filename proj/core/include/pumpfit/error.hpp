#pragma once

#include <stdexcept>
#include <string>

namespace pumpfit {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input data or a violated operation precondition.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Invalid run configuration or command-line usage.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A fit or solve that failed numerically (singular system, non-finite objective).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace pumpfit
