#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace pcdm {

/// Malformed or dimensionally inconsistent input data.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Parameters that make a method ill-posed (nonpositive Lipschitz constant,
/// singular input weight, ...).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Problem structure a routine deliberately does not handle.
class UnsupportedStructure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An inner solve failed during an outer iteration.
class IterationError : public std::runtime_error {
 public:
  IterationError(Eigen::Index block, const std::string& what)
      : std::runtime_error("block " + std::to_string(block) + ": " + what), block_(block) {}

  Eigen::Index block() const { return block_; }

 private:
  Eigen::Index block_;
};

}  // namespace pcdm
