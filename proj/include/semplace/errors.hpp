#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace semplace {

/// Base of every error thrown by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Out-of-range coordinate or parameter value.
class ValidationError : public Error
{
public:
  using Error::Error;
};

class EmptyInputError : public Error
{
public:
  using Error::Error;
};

class InsufficientDataError : public Error
{
public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation (NaN, lambda > 1, ...).
class DomainError : public Error
{
public:
  using Error::Error;
};

/// Structurally inconsistent input (mixed ids, length mismatch, bad fold plan).
class InputError : public Error
{
public:
  using Error::Error;
};

class IoError : public Error
{
public:
  using Error::Error;
};

class BudgetError : public Error
{
public:
  using Error::Error;
};

class FoldError : public Error
{
public:
  using Error::Error;
};

/// Malformed file content; carries the 1-based line number.
class ParseError : public Error
{
public:
  ParseError(std::size_t line, const std::string& what)
    : Error("line " + std::to_string(line) + ": " + what)
    , line_(line)
  {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/// Validation failure tied to a file line.
class LineValidationError : public ValidationError
{
public:
  LineValidationError(std::size_t line, const std::string& what)
    : ValidationError("line " + std::to_string(line) + ": " + what)
    , line_(line)
  {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

} // namespace semplace
