#pragma once

#include <stdexcept>
#include <string>

namespace m1path {

// Every failure raised by the library derives from Error; the CLI maps these
// to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the domain of an operation (time outside [0,T], bad mesh...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Input that is well formed but deliberately not handled (jump at the horizon).
class UnsupportedInput : public Error {
 public:
  explicit UnsupportedInput(const std::string& what) : Error("unsupported: " + what) {}
};

// A regularization precondition failed: the approximating path is not yet
// close enough to the limit. The message names the violated inequality.
class NotConvergedEnough : public Error {
 public:
  explicit NotConvergedEnough(const std::string& what) : Error("not converged enough: " + what) {}
};

class InfeasiblePartition : public Error {
 public:
  explicit InfeasiblePartition(const std::string& what) : Error("infeasible partition: " + what) {}
};

// Raised when a construction produces something that violates its own
// contract; indicates a bug rather than bad input.
class InternalConsistencyError : public Error {
 public:
  explicit InternalConsistencyError(const std::string& what)
      : Error("internal consistency: " + what) {}
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace m1path
