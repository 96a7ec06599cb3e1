#include "uqsa/error.hpp"

namespace uqsa {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::domain: return "domain";
    case ErrorKind::argument: return "argument";
    case ErrorKind::underdetermined: return "underdetermined";
    case ErrorKind::ill_posed: return "ill_posed";
    case ErrorKind::degenerate: return "degenerate";
    case ErrorKind::numerical_breakdown: return "numerical_breakdown";
    case ErrorKind::ill_conditioned: return "ill_conditioned";
    case ErrorKind::trend: return "trend";
    case ErrorKind::resource: return "resource";
    case ErrorKind::mechanism: return "mechanism";
    case ErrorKind::io: return "io";
    case ErrorKind::run_failed: return "run_failed";
  }
  return "unknown";
}

int exit_code(ErrorKind kind) noexcept {
  return 10 + static_cast<int>(kind);
}

}  // namespace uqsa
