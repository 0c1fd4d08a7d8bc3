#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace levy {

// Base for every failure raised by the library. The CLI maps the concrete
// type onto the "stage" field of its structured error report.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class QuadratureError : public Error {
 public:
  QuadratureError(const std::string& what, double estimated_error)
      : Error(what), estimated_error_(estimated_error) {}
  [[nodiscard]] double estimated_error() const noexcept { return estimated_error_; }

 private:
  double estimated_error_;
};

class EmptyResult : public Error {
 public:
  using Error::Error;
};

class DegenerateVariance : public Error {
 public:
  using Error::Error;
};

class RejectionBudgetExceeded : public Error {
 public:
  using Error::Error;
};

class OptimizerError : public Error {
 public:
  using Error::Error;
};

class NoCrossover : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  [[nodiscard]] std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace levy
