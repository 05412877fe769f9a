#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tempcast {

enum class ErrorCode {
  shape_mismatch,
  window_too_long,
  empty_tensor,
  invalid_dimension,
  missing_cache,
  layout_mismatch,
  non_finite,
  // model files
  version_mismatch,
  malformed_file,
  checksum_failure,
  // data ingestion and preparation
  io_error,
  missing_column,
  unparsable_rows,
  empty_file,
  empty_series,
  zero_variance,
  series_too_short,
  fraction_out_of_range,
  unknown_city,
  // metrics, fitting, training
  length_mismatch,
  empty_input,
  underdetermined_system,
  invalid_config,
  non_finite_loss,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  // True for failures of the numerics themselves rather than of the inputs.
  bool is_numerical() const noexcept {
    return code_ == ErrorCode::non_finite || code_ == ErrorCode::non_finite_loss;
  }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace tempcast
