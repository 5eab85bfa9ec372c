#include "motrace/error.hpp"

namespace motrace {

std::string_view code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::RoiOutOfBounds: return "RoiOutOfBounds";
    case ErrorCode::TooManyLevels: return "TooManyLevels";
    case ErrorCode::ImageTooSmall: return "ImageTooSmall";
    case ErrorCode::OutOfBounds: return "OutOfBounds";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidGain: return "InvalidGain";
    case ErrorCode::InvalidImage: return "InvalidImage";
    case ErrorCode::PatchOutOfBounds: return "PatchOutOfBounds";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::PyramidMismatch: return "PyramidMismatch";
    case ErrorCode::DegeneratePoint: return "DegeneratePoint";
    case ErrorCode::InsufficientPairs: return "InsufficientPairs";
    case ErrorCode::DegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorCode::NoConsensus: return "NoConsensus";
    case ErrorCode::NegativeThreshold: return "NegativeThreshold";
    case ErrorCode::UnsortedThresholds: return "UnsortedThresholds";
    case ErrorCode::EmptyField: return "EmptyField";
    case ErrorCode::BlockOutOfBounds: return "BlockOutOfBounds";
    case ErrorCode::SceneMismatch: return "SceneMismatch";
    case ErrorCode::InvalidIndex: return "InvalidIndex";
    case ErrorCode::InvalidPair: return "InvalidPair";
    case ErrorCode::InconsistentDimensions: return "InconsistentDimensions";
    case ErrorCode::EmptyFrameStore: return "EmptyFrameStore";
    case ErrorCode::DecoderUnavailable: return "DecoderUnavailable";
    case ErrorCode::StabilizationFailed: return "StabilizationFailed";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::BadFrameStore: return "BadFrameStore";
    case ErrorCode::UnknownSession: return "UnknownSession";
    case ErrorCode::NotFound: return "NotFound";
  }
  return "Unknown";
}

bool is_data_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::InsufficientPairs:
    case ErrorCode::DegenerateConfiguration:
    case ErrorCode::NoConsensus:
    case ErrorCode::StabilizationFailed:
    case ErrorCode::DegeneratePoint:
    case ErrorCode::EmptyField:
      return false;
    default:
      return true;
  }
}

Error::Error(ErrorCode code, const std::string& message, std::string detail)
    : std::runtime_error(std::string(code_name(code)) + ": " + message),
      code_(code),
      detail_(std::move(detail)) {}

}  // namespace motrace
