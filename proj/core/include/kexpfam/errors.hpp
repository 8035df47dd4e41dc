#pragma once

#include <stdexcept>
#include <string>

namespace kexpfam {

// Invalid parameters, malformed configuration, or inputs that violate a
// documented precondition (out-of-support samples, ragged CSV, ...).
// The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A computation that cannot be completed numerically: singular systems,
// failed eigendecompositions, degenerate denominators, non-convergent
// bisection. The CLI maps this to exit code 3.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace kexpfam
