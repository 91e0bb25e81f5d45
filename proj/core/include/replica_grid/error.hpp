#pragma once

#include <stdexcept>
#include <string>

namespace replica_grid {

// Base for every error raised by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A precondition on the caller's input does not hold.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// The instance cannot be satisfied, e.g. KN < M.
class Infeasible : public Error {
 public:
  using Error::Error;
};

// An invariant that the algorithms guarantee was violated. Reaching this is a bug.
class InternalError : public Error {
 public:
  using Error::Error;
};

// Exhaustive search refused because the instance exceeds the enumeration caps.
class SizeLimit : public Error {
 public:
  using Error::Error;
};

}  // namespace replica_grid
