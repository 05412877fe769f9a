#include "tempcast/error.hpp"

namespace tempcast {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::shape_mismatch: return "shape-mismatch";
    case ErrorCode::window_too_long: return "window-too-long";
    case ErrorCode::empty_tensor: return "empty-tensor";
    case ErrorCode::invalid_dimension: return "invalid-dimension";
    case ErrorCode::missing_cache: return "missing-cache";
    case ErrorCode::layout_mismatch: return "layout-mismatch";
    case ErrorCode::non_finite: return "non-finite";
    case ErrorCode::version_mismatch: return "version-mismatch";
    case ErrorCode::malformed_file: return "malformed-file";
    case ErrorCode::checksum_failure: return "checksum-failure";
    case ErrorCode::io_error: return "io-error";
    case ErrorCode::missing_column: return "missing-column";
    case ErrorCode::unparsable_rows: return "unparsable-rows";
    case ErrorCode::empty_file: return "empty-file";
    case ErrorCode::empty_series: return "empty-series";
    case ErrorCode::zero_variance: return "zero-variance";
    case ErrorCode::series_too_short: return "series-too-short";
    case ErrorCode::fraction_out_of_range: return "fraction-out-of-range";
    case ErrorCode::unknown_city: return "unknown-city";
    case ErrorCode::length_mismatch: return "length-mismatch";
    case ErrorCode::empty_input: return "empty-input";
    case ErrorCode::underdetermined_system: return "underdetermined-system";
    case ErrorCode::invalid_config: return "invalid-config";
    case ErrorCode::non_finite_loss: return "non-finite-loss";
  }
  return "unknown";
}

}  // namespace tempcast
