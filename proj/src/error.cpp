#include "wpcn/error.hpp"

namespace wpcn {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_parameter: return "invalid-parameter";
    case ErrorCode::degenerate_geometry: return "degenerate-geometry";
    case ErrorCode::domain_error: return "domain-error";
    case ErrorCode::infeasible_allocation: return "infeasible-allocation";
    case ErrorCode::degenerate_solution: return "degenerate-solution";
    case ErrorCode::instance_too_large: return "instance-too-large";
    case ErrorCode::config_error: return "config-error";
    case ErrorCode::io_error: return "io-error";
  }
  return "unknown";
}

}  // namespace wpcn
