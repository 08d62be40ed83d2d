#include "elgar/error.hpp"

namespace elgar {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegenerateRotation: return "DegenerateRotation";
    case ErrorCode::NotARotation: return "NotARotation";
    case ErrorCode::MissingAnchorJoints: return "MissingAnchorJoints";
    case ErrorCode::DegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorCode::ZeroLengthSegment: return "ZeroLengthSegment";
    case ErrorCode::NoPlayablePosition: return "NoPlayablePosition";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::MissingAnnotation: return "MissingAnnotation";
    case ErrorCode::ModelFailure: return "ModelFailure";
    case ErrorCode::FpsMismatch: return "FpsMismatch";
    case ErrorCode::BadOverlap: return "BadOverlap";
    case ErrorCode::NonFiniteActivation: return "NonFiniteActivation";
    case ErrorCode::NoVoicedFrames: return "NoVoicedFrames";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void raise(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace elgar
