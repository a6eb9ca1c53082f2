#pragma once

#include <stdexcept>
#include <string>

namespace dietbo {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text; carries the source name and 1-based line.
class SchemaError : public Error {
 public:
  SchemaError(const std::string& source, int line, const std::string& message)
      : Error(source + ":" + std::to_string(line) + ": " + message), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Well-formed input that breaks a domain invariant; names the field.
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& message)
      : Error("invalid " + field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Covariance factorization failed even at the largest jitter.
class ConditioningError : public Error {
 public:
  using Error::Error;
};

/// No feasible point could be located; names the most violated constraint.
class InfeasibleError : public Error {
 public:
  InfeasibleError(std::string constraint, double violation)
      : Error("no feasible point found; most violated constraint: " + constraint +
              " (by " + std::to_string(violation) + ")"),
        constraint_(std::move(constraint)),
        violation_(violation) {}
  const std::string& constraint() const { return constraint_; }
  double violation() const { return violation_; }

 private:
  std::string constraint_;
  double violation_;
};

}  // namespace dietbo
