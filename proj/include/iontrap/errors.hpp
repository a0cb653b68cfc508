#pragma once

#include <stdexcept>
#include <string>

namespace iontrap {

// Invalid user-supplied parameters or configuration.
class ConfigError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

// A numerical invariant (trace, Hermiticity, positivity, step-size bound)
// was violated during an evolution.
class InvariantError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Least-squares fit failed to converge or the input cannot be fitted.
class FitError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace iontrap
