#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace uqsa {

/// Failure categories. The CLI maps each one to its own exit code and a
/// machine-readable tag.
enum class ErrorKind {
  domain,               // value outside a distribution support or probability range
  argument,             // malformed or inconsistent arguments
  underdetermined,      // fewer data than unknowns
  ill_posed,            // rank-deficient least-squares system
  degenerate,           // zero variance, h_i = 1, repeated point, ...
  numerical_breakdown,  // factorization failure, negative variance
  ill_conditioned,      // duplicate design rows in noise-free GP data
  trend,                // rank-deficient trend matrix
  resource,             // a size cap was exceeded
  mechanism,            // singular truss stiffness
  io,                   // file or format problems
  run_failed,           // more than half of the replications failed at some design size
};

std::string_view to_string(ErrorKind kind) noexcept;
int exit_code(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) throw Error(kind, message);
}

}  // namespace uqsa
