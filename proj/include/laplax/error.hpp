#pragma once

#include <stdexcept>
#include <string>

namespace laplax {

// Malformed or precondition-violating input. The CLI maps this to exit code 1.
class InputError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// A randomized or iterative procedure gave up (retry limit, iteration cap).
// The CLI maps this to exit code 2.
class AlgorithmError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw InputError(message);
}

}  // namespace laplax
