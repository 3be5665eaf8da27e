#pragma once

#include <stdexcept>
#include <string>

namespace starnls {

/// Input outside the domain of an operation (bad parameters, invalid point,
/// vanishing vertex value, grid too short for a soliton tail).
class DomainError : public std::invalid_argument {
 public:
  explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

/// A numerical procedure failed to converge or detected a breakdown
/// (root bracketing exhausted, fixed point stalled, blow-up, wall contact).
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace starnls
