#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace soslyap {

/// Base class of everything this library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operands live in different ambient spaces (variable counts, matrix sizes).
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// An operation was applied outside its domain (odd degree, zero polynomial, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Text input could not be parsed. Carries a 1-based location.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace soslyap
