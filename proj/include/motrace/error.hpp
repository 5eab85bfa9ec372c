#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace motrace {

enum class ErrorCode {
  // image_core
  RoiOutOfBounds,
  TooManyLevels,
  ImageTooSmall,
  OutOfBounds,
  DimensionMismatch,
  InvalidGain,
  InvalidImage,
  // feature_detection
  PatchOutOfBounds,
  InvalidParams,
  // klt_tracking
  PyramidMismatch,
  // stabilization
  DegeneratePoint,
  InsufficientPairs,
  DegenerateConfiguration,
  NoConsensus,
  // motion_analysis
  NegativeThreshold,
  UnsortedThresholds,
  // visualization
  EmptyField,
  // synthetic_scenes
  BlockOutOfBounds,
  SceneMismatch,
  // pipeline
  InvalidIndex,
  InvalidPair,
  InconsistentDimensions,
  EmptyFrameStore,
  DecoderUnavailable,
  StabilizationFailed,
  IoError,
  ParseError,
  // service
  BadFrameStore,
  UnknownSession,
  NotFound,
};

/// Stable machine-readable name, e.g. "RoiOutOfBounds".
std::string_view code_name(ErrorCode code);

/// Errors that describe bad input data rather than a failed analysis.
bool is_data_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string detail = {});

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace motrace
