#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace eigenmodel {

// Precondition or input-format violation.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ParseError : public ValidationError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : ValidationError("line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// A factorization failed or a moment left its admissible range.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when code asks for the value of a dyad that is masked out.
class MissingDyadError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace eigenmodel
