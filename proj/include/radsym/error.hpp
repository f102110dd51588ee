#pragma once

#include <stdexcept>
#include <string>

namespace radsym {

/// Bad arguments or violated preconditions (maps to CLI exit code 2).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// File or stream failures, including malformed grid files (exit code 2).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input that breaks a mathematical invariant, e.g. negative values handed
/// to a rearrangement (exit code 3).
class InvariantError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace radsym
