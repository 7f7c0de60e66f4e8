#pragma once

#include <stdexcept>

namespace cifboot {

/// Bad user input: malformed files, invalid configuration, violated
/// preconditions. The CLI maps this to exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A computation could not produce a usable result (e.g. every bootstrap
/// replicate degenerate). The CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cifboot
