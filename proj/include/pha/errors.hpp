#pragma once

#include <stdexcept>
#include <string>

namespace pha {

/// Operand sizes do not agree.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A caller-side precondition was violated (infeasible input, inadmissible
/// step sizes, unsupported dispatch, ...).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Floating-point failure: non-finite iterates or a materially negative
/// quadratic form where a seminorm was expected.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or out-of-range experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require_same_size(long a, long b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": size " + std::to_string(a) + " vs " +
                         std::to_string(b));
  }
}

}  // namespace detail
}  // namespace pha
