#pragma once

#include <stdexcept>
#include <string>

namespace chiral {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or precondition violation at an API boundary.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// The basis is too small for the requested dynamics: population leaked into
/// the outermost shells, or a thermal cutoff dropped too much weight.
class TruncationError : public Error {
public:
  TruncationError(const std::string &what, double leaked)
      : Error(what), leaked_(leaked) {}

  double leaked() const noexcept { return leaked_; }

private:
  double leaked_;
};

/// The adaptive ODE integrator could not make progress.
class IntegrationError : public Error {
public:
  using Error::Error;
};

} // namespace chiral
