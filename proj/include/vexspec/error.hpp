#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vexspec {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Operands whose node/cell counts disagree.
class ShapeError : public Error {
public:
  using Error::Error;
};

/// Input outside the mathematical domain of an operation
/// (non-finite values, exponents <= 1, the zero function where a
/// nontrivial one is required, ...).
class DomainError : public Error {
public:
  using Error::Error;
};

/// A non-finite intermediate while evaluating an energy.
class OverflowError : public Error {
public:
  OverflowError(const std::string& what, std::size_t cell)
      : Error(what), cell_(cell) {}
  std::size_t cell() const noexcept { return cell_; }

private:
  std::size_t cell_;
};

/// The problem instance is not in the exponent regime a solver needs.
class RegimeError : public Error {
public:
  using Error::Error;
};

/// Expression syntax error; column is 1-based.
class ParseError : public Error {
public:
  ParseError(const std::string& what, std::size_t column)
      : Error(what + " (column " + std::to_string(column) + ")"), column_(column) {}
  std::size_t column() const noexcept { return column_; }

private:
  std::size_t column_;
};

/// Invalid run configuration; the message names the offending field.
class ConfigError : public Error {
public:
  using Error::Error;
};

}  // namespace vexspec
