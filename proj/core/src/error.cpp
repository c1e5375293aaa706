#include "stopwindow/error.hpp"

namespace stopwindow {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedHeader: return "malformed_header";
    case ErrorCode::MalformedRow: return "malformed_row";
    case ErrorCode::NonConsecutiveEpochs: return "non_consecutive_epochs";
    case ErrorCode::EmptyTrace: return "empty_trace";
    case ErrorCode::InvalidParams: return "invalid_params";
    case ErrorCode::TooShort: return "too_short";
    case ErrorCode::InvalidN: return "invalid_n";
    case ErrorCode::InvalidD: return "invalid_d";
    case ErrorCode::InvalidConfig: return "invalid_config";
    case ErrorCode::InvalidRecord: return "invalid_record";
    case ErrorCode::FedAfterStop: return "fed_after_stop";
    case ErrorCode::NonConsecutiveEpoch: return "non_consecutive_epoch";
    case ErrorCode::MissingLoss: return "missing_loss";
    case ErrorCode::InvalidStrategy: return "invalid_strategy";
    case ErrorCode::WindowOutOfRange: return "window_out_of_range";
    case ErrorCode::OutOfRange: return "out_of_range";
    case ErrorCode::NonPositiveMax: return "non_positive_max";
  }
  return "unknown";
}

}  // namespace stopwindow
