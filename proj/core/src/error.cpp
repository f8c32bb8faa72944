#include "sat2pano/error.hpp"

namespace sat2pano {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kOriginPoint: return "OriginPoint";
    case ErrorCode::kDegeneratePoint: return "DegeneratePoint";
    case ErrorCode::kPoleRay: return "PoleRay";
    case ErrorCode::kHeightOutOfRange: return "HeightOutOfRange";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kZeroDimension: return "ZeroDimension";
    case ErrorCode::kEmptyStack: return "EmptyStack";
    case ErrorCode::kEmptyMask: return "EmptyMask";
    case ErrorCode::kEmptyValidRegion: return "EmptyValidRegion";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kUnsupportedFormat: return "UnsupportedFormat";
  }
  return "Unknown";
}

}  // namespace sat2pano
