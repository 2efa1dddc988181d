#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kdeforge {

/// A caller-supplied argument violates an operation's precondition.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Point or sample dimension does not match the model it is used with.
class DimensionMismatch : public InvalidArgument {
 public:
  DimensionMismatch(std::size_t expected, std::size_t actual)
      : InvalidArgument("dimension mismatch: expected " + std::to_string(expected) +
                        ", got " + std::to_string(actual)),
        expected_(expected),
        actual_(actual) {}

  std::size_t expected() const noexcept { return expected_; }
  std::size_t actual() const noexcept { return actual_; }

 private:
  std::size_t expected_;
  std::size_t actual_;
};

/// The requested operation is not defined for this kernel or configuration
/// (e.g. derivatives of the spherical kernel).
class Unsupported : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A numerical procedure produced an unusable intermediate (flat pilot
/// curvature, vanishing spread).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input data. `line()` is 1-based, 0 when not tied to a line.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& message, std::size_t line = 0)
      : std::runtime_error(line == 0 ? message
                                     : "line " + std::to_string(line) + ": " + message),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace kdeforge
