#pragma once

#include <stdexcept>
#include <string>

namespace kpl {

/// Precondition violated by a caller-supplied argument.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Evaluation requested outside the observed span of a function.
class OutOfRange : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// A numerical routine failed (non-finite value, factorization failure).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Problem too large for a dense code path.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {
inline void require(bool cond, const std::string& msg) {
  if (!cond) throw InvalidArgument(msg);
}
}  // namespace detail

}  // namespace kpl
