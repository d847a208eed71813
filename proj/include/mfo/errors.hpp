#pragma once

#include <stdexcept>
#include <string>

namespace mfo {

// Base class for every error raised by the library. The CLI maps each
// subclass to its own exit code and machine-readable tag.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

class DimensionError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "dimension"; }
};

class ConfigError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "config"; }
};

class FormatError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "format"; }
};

class IoError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "io"; }
};

class NumericError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "numeric"; }
};

// Raised while evaluating an objective; carries the name of the cost term
// that failed so callers can attribute the error.
class TermError : public Error {
 public:
  TermError(std::string term, const std::string& what)
      : Error(term + ": " + what), term_(std::move(term)) {}
  const char* kind() const noexcept override { return "term"; }
  const std::string& term() const noexcept { return term_; }

 private:
  std::string term_;
};

}  // namespace mfo
