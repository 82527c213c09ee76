#pragma once

#include <stdexcept>
#include <string>

namespace hcarma {

// Shapes or spaces of the operands do not agree.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A companion block has the wrong shape; the message names the block.
class AssemblyError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Overflow, singular products, eigensolver failure, divergent recursions.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The requested operation is not defined for this configuration
// (e.g. a Gaussian law for jump noise).
class UnsupportedError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Malformed scenario input; the message carries the field path.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace hcarma
