#pragma once

#include <stdexcept>
#include <string>

namespace primeforms {

/// Raised when an operation is called outside its documented domain.
class precondition_error : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when an enumeration or table would exceed its hard size cap, or
/// when an exact integer result does not fit the 64-bit representation.
/// Never used for silent truncation: callers always see it.
class budget_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw precondition_error(what);
}

}  // namespace primeforms
