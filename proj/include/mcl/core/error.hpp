#pragma once

#include <stdexcept>
#include <string>

namespace mcl {

// Error taxonomy shared by all modules. Each maps to one failure contract:
// shape/input preconditions, bad configuration, invalid object state,
// filesystem problems, and non-finite numerics.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ShapeError : Error {
  using Error::Error;
};

struct InputError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct StateError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

struct NumericError : Error {
  using Error::Error;
};

}  // namespace mcl
