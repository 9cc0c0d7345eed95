#pragma once

#include <stdexcept>
#include <string>

namespace balcl {

// Bad user input: malformed files, invalid parameter combinations.
class InvalidArgument : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The requested problem has no solution (LP/flow infeasible, no threshold works).
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An internal guarantee failed; indicates a bug, not a user error.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw InvalidArgument(msg);
}

inline void ensure(bool cond, const std::string& msg) {
  if (!cond) throw InvariantError(msg);
}

}  // namespace balcl
