#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ipinn {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A bound pair with upper < lower at some evaluation point.
class InvalidBoundsError : public Error {
 public:
  using Error::Error;
};

class NonFiniteError : public Error {
 public:
  /// `lane` is the batch lane (collocation point) where the value appeared,
  /// or -1 when not known.
  explicit NonFiniteError(const std::string& what, std::ptrdiff_t lane = -1)
      : Error(what), lane_(lane) {}
  std::ptrdiff_t lane() const { return lane_; }

 private:
  std::ptrdiff_t lane_;
};

class UnboundVariableError : public Error {
 public:
  using Error::Error;
};

class UnsupportedOperationError : public Error {
 public:
  using Error::Error;
};

/// Caller violated an operation precondition (e.g. a missing derivative).
class ContractError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t column)
      : Error(what + " (column " + std::to_string(column + 1) + ")"), column_(column) {}
  std::size_t column() const { return column_; }

 private:
  std::size_t column_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace ipinn
