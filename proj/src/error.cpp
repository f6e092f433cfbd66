#include "algsample/error.hpp"

#include <sstream>
#include <utility>

namespace algsample {

namespace {

std::string format_point(const std::vector<double>& point) {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (std::size_t i = 0; i < point.size(); ++i) {
    if (i) os << ", ";
    os << point[i];
  }
  os << ')';
  return os.str();
}

}  // namespace

ParseError::ParseError(const std::string& message, std::size_t line, std::size_t column)
    : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
      detail_(message),
      line_(line),
      column_(column) {}

DomainError::DomainError(const std::string& message, std::vector<double> point)
    : Error(message + " at " + format_point(point)), point_(std::move(point)) {}

SingularPointError::SingularPointError(const std::string& message, std::vector<double> point)
    : Error(message + " at " + format_point(point)), point_(std::move(point)) {}

DegreeBoundExceeded::DegreeBoundExceeded(std::size_t found, std::size_t bound)
    : Error("slice produced " + std::to_string(found) + " real intersection points, more than the degree bound " +
            std::to_string(bound)),
      found_(found),
      bound_(bound) {}

AcceptanceFloorError::AcceptanceFloorError(const std::string& message, std::size_t trials, std::size_t accepted)
    : Error(message), trials_(trials), accepted_(accepted) {}

}  // namespace algsample
