#pragma once

#include <stdexcept>
#include <string>

namespace kpp {

/// Argument outside the mathematical domain of an operation (negative speed,
/// non-finite input, reaction argument outside [-1, 1], ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A numerical procedure failed to converge or lost accuracy. `where` carries
/// the location (abscissa, bracket end, time) at which it happened.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, double where)
      : std::runtime_error(what), where_(where) {}
  explicit NumericError(const std::string& what)
      : std::runtime_error(what), where_(0.0) {}

  double where() const noexcept { return where_; }

 private:
  double where_;
};

/// Inputs that are individually valid but inconsistent with each other.
class InconsistentInputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Invalid run configuration: unknown keys, schema violations, unstable time
/// steps.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace kpp
