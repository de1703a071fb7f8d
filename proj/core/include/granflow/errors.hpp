#pragma once

#include <stdexcept>
#include <string>

namespace granflow {

/// An argument lies outside the mathematical domain of a law (p <= 0, phi >= 1, ...).
class DomainError : public std::domain_error
{
public:
  using std::domain_error::domain_error;
};

/// A numerical kernel (quadrature, bisection, eigensolver) failed to deliver.
class NumericalError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent configuration. Carries the source line when known.
class ConfigError : public std::runtime_error
{
public:
  explicit ConfigError(const std::string& what, int line = 0)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what)
    , line_(line)
  {}

  int line() const noexcept { return line_; }

private:
  int line_;
};

} // namespace granflow
