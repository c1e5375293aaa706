#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stopwindow {

enum class ErrorCode {
  // trace ingestion / validation
  MalformedHeader,
  MalformedRow,
  NonConsecutiveEpochs,
  EmptyTrace,
  InvalidParams,
  // calculus
  TooShort,
  InvalidN,
  InvalidD,
  // detector
  InvalidConfig,
  InvalidRecord,
  FedAfterStop,
  NonConsecutiveEpoch,
  // baselines
  MissingLoss,
  InvalidStrategy,
  // report
  WindowOutOfRange,
  OutOfRange,
  NonPositiveMax,
};

/// Stable snake_case identifier, used in serve-mode error responses.
std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace stopwindow
