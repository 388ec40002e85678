#pragma once

#include <stdexcept>
#include <string>

namespace unarysim {

// Bad arguments, shapes, widths or configurations.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// File could not be read, written or parsed.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace unarysim
