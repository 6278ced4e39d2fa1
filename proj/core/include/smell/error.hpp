#pragma once

#include <stdexcept>
#include <string>

namespace smell {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input that cannot be parsed or violates a record invariant.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Shape or precondition violation on numeric inputs.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace smell
