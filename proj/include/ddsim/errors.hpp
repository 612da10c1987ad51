#pragma once

#include <stdexcept>
#include <string>

namespace ddsim {

// Error taxonomy. The CLI maps each class to its own process exit code.

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-convergence of the trainer or the conjugate-gradient solve.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ddsim
