#pragma once

#include <stdexcept>
#include <string>

namespace mswres {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value violates a type invariant (negative inductance, unsorted grid...).
class InvariantError : public Error {
 public:
  using Error::Error;
};

/// A conversion hit a singular point, e.g. S = 1 in s_to_z.
class SingularPointError : public Error {
 public:
  SingularPointError(const std::string& what, double frequency_hz)
      : Error(what), frequency_(frequency_hz) {}
  double frequency() const noexcept { return frequency_; }

 private:
  double frequency_;
};

/// Operation was applied to a spectrum of the wrong kind or grid.
class DomainError : public Error {
 public:
  using Error::Error;
};

}  // namespace mswres
