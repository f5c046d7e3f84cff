#include "porcelain/error.hpp"

namespace porcelain {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownTask: return "UnknownTask";
    case ErrorCode::UnknownCategory: return "UnknownCategory";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::DuplicateSampleId: return "DuplicateSampleId";
    case ErrorCode::EmptyManifest: return "EmptyManifest";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::UndecodableImage: return "UndecodableImage";
    case ErrorCode::ZeroSizeImage: return "ZeroSizeImage";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::InvalidChannels: return "InvalidChannels";
    case ErrorCode::UnknownArch: return "UnknownArch";
    case ErrorCode::WeightsUnavailable: return "WeightsUnavailable";
    case ErrorCode::CheckpointMismatch: return "CheckpointMismatch";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::TargetOutOfRange: return "TargetOutOfRange";
    case ErrorCode::EmptyBatch: return "EmptyBatch";
    case ErrorCode::EmptyMatrix: return "EmptyMatrix";
    case ErrorCode::EmptyReportSet: return "EmptyReportSet";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::EmptySplit: return "EmptySplit";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnknownKey: return "UnknownKey";
    case ErrorCode::InvalidValue: return "InvalidValue";
    case ErrorCode::UnknownCommand: return "UnknownCommand";
  }
  return "Unknown";
}

namespace {

std::string one_line(std::string s) {
  for (auto& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(error_code_name(code)) + ": " + one_line(detail)),
      code_(code),
      detail_(detail) {}

}  // namespace porcelain
