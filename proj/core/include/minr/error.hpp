#pragma once

#include <stdexcept>
#include <string>

namespace minr {

// Base class for everything the library throws. The CLI maps the concrete
// subclasses onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dimension or configuration contract violated by the caller.
class ShapeError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Unreadable, malformed or truncated files.
class DataError : public Error {
 public:
  using Error::Error;
};

class FormatError : public DataError {
 public:
  using DataError::DataError;
};

// NaN or Inf produced or consumed by a numeric kernel.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace minr
