#pragma once

#include <stdexcept>
#include <string>

namespace wpcn {

enum class ErrorCode {
  invalid_parameter,
  degenerate_geometry,
  domain_error,
  infeasible_allocation,
  degenerate_solution,
  instance_too_large,
  config_error,
  io_error,
};

const char* to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries a machine-readable code next
// to the human-readable message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace wpcn
