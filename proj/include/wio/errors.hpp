#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wio {

enum class ErrorCode {
  insufficient_samples,
  irregular_stamps,
  invalid_value,
  invalid_script,
  shape_mismatch,
  disconnected_graph,
  invalid_spec,
  empty_batch,
  insufficient_data,
  log_too_short,
  length_mismatch,
  trajectory_too_short,
  empty_input,
  io_failure,
  parse_failure,
  invalid_config,
  spec_mismatch,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so that
/// callers (and tests) can dispatch on the kind without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace wio
