#pragma once

#include <stdexcept>
#include <string>

namespace dpsom {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Bad or missing input data (empty sets, unreadable files).
class InputError : public Error {
 public:
  using Error::Error;
};

/// Malformed file contents. The message names the byte offset or line.
class FormatError : public InputError {
 public:
  using InputError::InputError;
};

/// Raised when Moran's index has a zero-variance denominator.
class UndefinedIndexError : public Error {
 public:
  using Error::Error;
};

/// A loss term or its gradient became non-finite.
class NumericalFailure : public Error {
 public:
  NumericalFailure(std::string term, const std::string& what)
      : Error("numerical failure in '" + term + "': " + what), term_(std::move(term)) {}

  const std::string& term() const noexcept { return term_; }

 private:
  std::string term_;
};

}  // namespace dpsom
