#pragma once

#include <stdexcept>
#include <string>

namespace rrauc {

/// Base class for all library failures.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input data: shape mismatch, non-binary responses, bad CSV.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Optimizer or decomposition produced or received non-finite values.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration or plan contents.
class ConfigError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline void require_shape(bool ok, const std::string& what) {
  if (!ok) throw DataError("shape mismatch: " + what);
}

}  // namespace detail
}  // namespace rrauc
