#include "deformclass/error.hpp"

namespace deformclass {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::ResolutionTooSmall: return "ResolutionTooSmall";
    case ErrorCode::AllZeroImage: return "AllZeroImage";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::InvalidDistribution: return "InvalidDistribution";
    case ErrorCode::InvalidFixtureParams: return "InvalidFixtureParams";
    case ErrorCode::EmptySupport: return "EmptySupport";
    case ErrorCode::ZeroZ: return "ZeroZ";
    case ErrorCode::EmptyGallery: return "EmptyGallery";
    case ErrorCode::ResolutionMismatch: return "ResolutionMismatch";
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::MultipleComponents: return "MultipleComponents";
    case ErrorCode::DegenerateCurve: return "DegenerateCurve";
    case ErrorCode::ZeroNorm: return "ZeroNorm";
    case ErrorCode::FilterTooLarge: return "FilterTooLarge";
    case ErrorCode::EmptyList: return "EmptyList";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::BadCheckpoint: return "BadCheckpoint";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::TruncatedPayload: return "TruncatedPayload";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::BadManifest: return "BadManifest";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

int exit_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigError:
    case ErrorCode::InvalidDistribution:
    case ErrorCode::InvalidFixtureParams:
    case ErrorCode::InvalidParams:
      return 2;
    case ErrorCode::BadMagic:
    case ErrorCode::TruncatedPayload:
    case ErrorCode::DimMismatch:
    case ErrorCode::BadManifest:
    case ErrorCode::BadCheckpoint:
    case ErrorCode::ShapeMismatch:
    case ErrorCode::EmptyDataset:
    case ErrorCode::EmptyGallery:
    case ErrorCode::ResolutionMismatch:
    case ErrorCode::EmptyMask:
    case ErrorCode::MultipleComponents:
      return 3;
    default:
      return 4;
  }
}

}  // namespace deformclass
