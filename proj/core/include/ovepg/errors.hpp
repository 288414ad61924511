#pragma once

#include <stdexcept>
#include <string>

namespace ovepg {

/// Base for all library errors. Distinct subclasses let the CLI map failures
/// onto its exit-code contract.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A hyperparameter or configuration value is outside its valid domain.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Input arrays have the wrong shape or invalid contents.
class InputError : public Error {
 public:
  using Error::Error;
};

/// An API was called out of order (e.g. backward with a stale cache).
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite value.
class NumericalError : public Error {
 public:
  using Error::Error;
};

enum class LoadErrorKind {
  io,
  bad_magic,
  truncated,
  count_mismatch,
  label_out_of_range,
  bad_header,
};

const char* to_string(LoadErrorKind kind) noexcept;

class LoadError : public Error {
 public:
  LoadError(LoadErrorKind kind, const std::string& what)
      : Error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  LoadErrorKind kind() const noexcept { return kind_; }

 private:
  LoadErrorKind kind_;
};

}  // namespace ovepg
