#ifndef GRADHARM_ERROR_HPP
#define GRADHARM_ERROR_HPP

#include <stdexcept>
#include <string>

namespace gradharm {

// Base class for every error raised by the core. The C API translates the
// concrete type into a gh_status code at the boundary.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Vector lengths disagree where a shared parameter scope is required.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Input is valid syntactically but the operation is undefined on it
// (zero vector for an angle, antiparallel pair for a rotation plane).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

// Caller violated a documented argument contract (lambda outside [0,1],
// non-positive dimensions, unknown method name, ...).
class InvalidArgumentError : public Error {
 public:
  using Error::Error;
};

// Malformed file content; line() is 1-based, or 0 when not line-addressable.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& msg, long line = 0)
      : Error(line > 0 ? msg + " (line " + std::to_string(line) + ")" : msg),
        line_(line) {}
  long line() const { return line_; }

 private:
  long line_ = 0;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Training produced a non-finite quantity; carries the aborting iteration.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& msg, long long iteration = -1)
      : Error(iteration >= 0 ? msg + " (iteration " + std::to_string(iteration) + ")" : msg),
        iteration_(iteration) {}
  long long iteration() const { return iteration_; }

 private:
  long long iteration_ = -1;
};

}  // namespace gradharm

#endif
