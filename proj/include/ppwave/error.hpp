#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace ppwave {

enum class ErrorCode {
  NonSymmetric,
  NonTraceless,
  ZeroOperator,
  ConstantF,
  DimensionTooSmall,
  InvalidArgument,
  BasePointMismatch,
  ModelMismatch,
  StepFailure,
  BlowUpDetected,
  NotAGenerator,
  NotInSigmaForm,
  NonCommutingF,
  RankDeficient,
  ConfigError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonSymmetric: return "NonSymmetric";
    case ErrorCode::NonTraceless: return "NonTraceless";
    case ErrorCode::ZeroOperator: return "ZeroOperator";
    case ErrorCode::ConstantF: return "ConstantF";
    case ErrorCode::DimensionTooSmall: return "DimensionTooSmall";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::BasePointMismatch: return "BasePointMismatch";
    case ErrorCode::ModelMismatch: return "ModelMismatch";
    case ErrorCode::StepFailure: return "StepFailure";
    case ErrorCode::BlowUpDetected: return "BlowUpDetected";
    case ErrorCode::NotAGenerator: return "NotAGenerator";
    case ErrorCode::NotInSigmaForm: return "NotInSigmaForm";
    case ErrorCode::NonCommutingF: return "NonCommutingF";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

/// Library error. `path` is a JSON pointer when the error comes from a config
/// document, empty otherwise.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string path = {})
      : std::runtime_error(std::string(to_string(code)) + ": " + message +
                           (path.empty() ? std::string() : " (at " + path + ")")),
        code_(code),
        message_(message),
        path_(std::move(path)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& message() const noexcept { return message_; }
  const std::string& path() const noexcept { return path_; }

 private:
  ErrorCode code_;
  std::string message_;
  std::string path_;
};

}  // namespace ppwave
