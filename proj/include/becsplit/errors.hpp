#pragma once

#include <stdexcept>
#include <string>

namespace becsplit {

// Invalid user input: out-of-range values, malformed files, violated
// preconditions of a public operation.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A computation produced unusable results (degenerate spectrum, failed fit,
// singular system, ...).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// An iterative method exhausted its budget before reaching tolerance. Carries
// the last residual so callers can report how far off it stopped.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double last_residual)
      : std::runtime_error(what), last_residual_(last_residual) {}
  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

}  // namespace becsplit
