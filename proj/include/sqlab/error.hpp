#pragma once

#include <stdexcept>
#include <string>

namespace sqlab {

// Invalid parameters, violated invariants, malformed input.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Configuration problems surfaced to the CLI as exit status 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised by the kernel LP when it cannot certify an optimum.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double best_value, double gap)
      : std::runtime_error(what), best_value_(best_value), gap_(gap) {}

  double best_value() const { return best_value_; }
  double gap() const { return gap_; }

 private:
  double best_value_;
  double gap_;
};

}  // namespace sqlab
