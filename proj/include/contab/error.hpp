#pragma once

#include <stdexcept>
#include <string>

namespace contab {

/// Bad input, schema or configuration. CLI exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite values or degenerate numerics. CLI exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace contab
