#pragma once

#include <stdexcept>
#include <string>

namespace parablab {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation (t <= 0, p = 0, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Input outside the representable range of an implicitly defined function.
class RangeError : public Error {
 public:
  using Error::Error;
};

class GridMismatch : public Error {
 public:
  using Error::Error;
};

/// Time integration stopped: blow-up, CFL underflow, or gradient above the probe cap.
class SolverAbort : public Error {
 public:
  using Error::Error;
};

/// Configuration or catalog lookup failed. `path()` names the offending field.
class ValidationError : public Error {
 public:
  ValidationError(std::string path, const std::string& what)
      : Error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace parablab
