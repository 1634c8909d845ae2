#pragma once

#include <stdexcept>
#include <string>

namespace dyadlab {

// Violated precondition: bad arguments, scale mismatch, exhausted budget.
// The CLI maps it to exit code 2.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw PreconditionError(what);
}

}  // namespace dyadlab
