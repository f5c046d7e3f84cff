#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace porcelain {

enum class ErrorCode {
  UnknownTask,
  UnknownCategory,
  IndexOutOfRange,
  MissingColumn,
  DuplicateSampleId,
  EmptyManifest,
  TooFewSamples,
  UndecodableImage,
  ZeroSizeImage,
  IoError,
  InvalidSpec,
  InvalidChannels,
  UnknownArch,
  WeightsUnavailable,
  CheckpointMismatch,
  ShapeMismatch,
  TargetOutOfRange,
  EmptyBatch,
  EmptyMatrix,
  EmptyReportSet,
  NonFiniteLoss,
  EmptySplit,
  ParseError,
  UnknownKey,
  InvalidValue,
  UnknownCommand,
};

std::string_view error_code_name(ErrorCode code);

// All library failures surface as this type. what() is "<CodeName>: <detail>"
// on a single line so the CLI can print it verbatim.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail);

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace porcelain
