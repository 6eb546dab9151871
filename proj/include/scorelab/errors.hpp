#pragma once

#include <stdexcept>
#include <string>

namespace scorelab {

// KL(p||q) with some q_i = 0 while p_i > 0. Raised instead of returning a
// float so that +inf cannot leak into bound arithmetic unnoticed.
class InfiniteDivergence : public std::runtime_error {
 public:
  explicit InfiniteDivergence(const std::string& what) : std::runtime_error(what) {}
};

// Query outside the mathematical domain of an operation, e.g. the log
// gradient of a zero-probability label.
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

// Operation defined only for a specific distribution kind.
class UnsupportedKind : public std::invalid_argument {
 public:
  explicit UnsupportedKind(const std::string& what) : std::invalid_argument(what) {}
};

// A verification routine's standing assumption fails on the given instance.
class AssumptionError : public std::runtime_error {
 public:
  explicit AssumptionError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace scorelab
