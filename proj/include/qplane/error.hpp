#pragma once

#include <stdexcept>
#include <string>

namespace qp {

enum class ErrorKind {
  domain,           // argument outside the documented domain
  singular_point,   // evaluation at or too close to a singular point
  convergence,      // series/iteration did not reach tolerance
  step_underflow,   // adaptive integrator could not make progress
  ill_conditioned,  // linear solve with a degenerate basis
  degenerate,       // generalised Wronskian vanished
  no_root,          // search window holds no eigenpair
  unmatched_bypass, // contour bypass flags violate the matching rule
  config            // invalid user configuration
};

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

private:
  ErrorKind kind_;
};

} // namespace qp
