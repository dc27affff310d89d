#pragma once

#include <stdexcept>
#include <string>

namespace lrmr {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// An argument lies outside its documented domain.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Non-finite intermediate, failed decomposition, or a non-converging iteration.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// sigma_r of a matrix fell below the numerical rank threshold.
class RankDeficiencyError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// A dense computation would exceed the size guard.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file; carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace lrmr
