#pragma once

#include <stdexcept>
#include <string>

namespace udist {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A documented precondition of an operation does not hold
// (dimension mismatch, dependent input, out-of-range parameter).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// A size or precision cap was exceeded.
class CapExceeded : public Error {
 public:
  using Error::Error;
};

// Malformed serialized input or configuration.
class ParseError : public Error {
 public:
  using Error::Error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw PreconditionError(what);
}

}  // namespace udist
