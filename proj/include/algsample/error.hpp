#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace algsample {

// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Syntax or semantic error in textual input. Line and column are 1-based.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line, std::size_t column);

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string detail_;
  std::size_t line_;
  std::size_t column_;
};

// An expression was evaluated outside its real domain (log of a
// non-positive number, acos outside [-1,1], division by zero, overflow).
class DomainError : public Error {
 public:
  DomainError(const std::string& message, std::vector<double> point);

  const std::vector<double>& point() const noexcept { return point_; }

 private:
  std::vector<double> point_;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

// Jacobian rank at a manifold point does not match the codimension.
class SingularPointError : public Error {
 public:
  SingularPointError(const std::string& message, std::vector<double> point);

  const std::vector<double>& point() const noexcept { return point_; }

 private:
  std::vector<double> point_;
};

// A slice met the manifold in more real points than the degree bound allows.
class DegreeBoundExceeded : public Error {
 public:
  DegreeBoundExceeded(std::size_t found, std::size_t bound);

  std::size_t found() const noexcept { return found_; }
  std::size_t bound() const noexcept { return bound_; }

 private:
  std::size_t found_;
  std::size_t bound_;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

// kappa * fbar exceeded one: the supplied bounds K or C are wrong.
class InvalidBoundsError : public Error {
 public:
  using Error::Error;
};

// A file could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

// Rejection sampler acceptance rate fell below the configured floor.
class AcceptanceFloorError : public Error {
 public:
  AcceptanceFloorError(const std::string& message, std::size_t trials, std::size_t accepted);

  std::size_t trials() const noexcept { return trials_; }
  std::size_t accepted() const noexcept { return accepted_; }

 private:
  std::size_t trials_;
  std::size_t accepted_;
};

}  // namespace algsample
