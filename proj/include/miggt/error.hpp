#pragma once

#include <stdexcept>
#include <string>

namespace miggt {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shapes of two operands do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// An index or a parameter is outside its allowed range.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// A file or text document could not be parsed.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// A numeric quantity became NaN or infinite.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace miggt
