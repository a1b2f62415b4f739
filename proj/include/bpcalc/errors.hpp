#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bpcalc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the domain of an operation (e.g. s with a nonnegative component).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A numerical budget was exhausted before the requested accuracy was reached.
class AccuracyError : public Error {
 public:
  AccuracyError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// The requested construction is not available for this input.
class CapabilityError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class CommutatorError : public Error {
 public:
  CommutatorError(std::size_t i, std::size_t j, double norm);
  std::size_t first() const noexcept { return i_; }
  std::size_t second() const noexcept { return j_; }
  double norm() const noexcept { return norm_; }

 private:
  std::size_t i_;
  std::size_t j_;
  double norm_;
};

/// Malformed structured document. line is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& key, int line, const std::string& message);
  const std::string& key() const noexcept { return key_; }
  int line() const noexcept { return line_; }

 private:
  std::string key_;
  int line_;
};

}  // namespace bpcalc
