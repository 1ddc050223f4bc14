#pragma once

#include <stdexcept>
#include <string>

namespace hartree {

/// Raised when an argument violates an operation's precondition.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Two operands live on different grids.
class GridMismatch : public ParameterError {
 public:
  GridMismatch() : ParameterError("fields are defined on different grids") {}
  explicit GridMismatch(const std::string& what) : ParameterError(what) {}
};

/// Time stepping produced non-finite values or exceeded the amplitude guard.
class BlowUpError : public std::runtime_error {
 public:
  BlowUpError(const std::string& what, double time)
      : std::runtime_error(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// Malformed, truncated or corrupt snapshot or config file.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hartree
