#pragma once

#include <stdexcept>
#include <string>

namespace jdqml {

/// Parameter or configuration value violates a precondition.
class InvalidParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// S(x, alpha) = a a^T failed the positive-definiteness requirement.
class SingularSError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A threshold filter left too few increments for an estimator to be
/// defined. The message names the failed count.
class DegenerateFilterError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Simulated state left the representable range.
class NonFiniteStateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A constraint fixes a component outside its bounds interval.
class ConstraintError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed input file; carries the offending 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, long line) : std::runtime_error(what), line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

}  // namespace jdqml
