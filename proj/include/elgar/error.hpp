#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace elgar {

enum class ErrorCode {
  DegenerateRotation,
  NotARotation,
  MissingAnchorJoints,
  DegenerateConfiguration,
  ZeroLengthSegment,
  NoPlayablePosition,
  ShapeMismatch,
  MissingAnnotation,
  ModelFailure,
  FpsMismatch,
  BadOverlap,
  NonFiniteActivation,
  NoVoicedFrames,
  ZeroVector,
  ParseError,
  InvalidArgument,
  IoError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void raise(ErrorCode code, const std::string& message);

}  // namespace elgar
