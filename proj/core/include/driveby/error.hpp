#pragma once

#include <stdexcept>
#include <string>

namespace driveby {

/// Broad failure category; the CLI maps it onto a process exit code.
enum class ErrorKind {
  invalid_input,  // bad configuration, bad arguments, violated precondition
  numerical,      // solver breakdown, NaN, singular system
  io,             // unreadable / malformed files
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class InvalidInput : public Error {
 public:
  explicit InvalidInput(const std::string& what)
      : Error(ErrorKind::invalid_input, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what)
      : Error(ErrorKind::numerical, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

}  // namespace driveby
