#pragma once

#include <stdexcept>
#include <string>

namespace turnpike {

/// Precondition or dimension violation in a library call.
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Query outside the domain of a sampled object (e.g. time outside a grid).
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Numerical integration produced non-finite state.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Hyperbolic functions past the double-precision limit (|t| ~ 700).
class OverflowError : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

/// Newton iteration failed to reach the residual tolerance.
class RootFindError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// User-supplied callback returned NaN/Inf.
class CallbackError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Scenario file rejected; carries the offending line (0 = whole file).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

}  // namespace turnpike
