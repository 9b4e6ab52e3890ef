#pragma once

#include <stdexcept>
#include <string>

namespace deformclass {

enum class ErrorCode {
  // model
  InvalidParams,
  ResolutionTooSmall,
  AllZeroImage,
  ShapeMismatch,
  // datagen
  InvalidDistribution,
  InvalidFixtureParams,
  // align
  EmptySupport,
  ZeroZ,
  EmptyGallery,
  ResolutionMismatch,
  // geometry
  EmptyMask,
  MultipleComponents,
  DegenerateCurve,
  // separation
  ZeroNorm,
  // cnn
  FilterTooLarge,
  EmptyList,
  EmptyDataset,
  BadCheckpoint,
  // io
  BadMagic,
  TruncatedPayload,
  DimMismatch,
  BadManifest,
  // harness
  ConfigError,
};

const char* to_string(ErrorCode code);

/// Process exit status for the CLI: 2 config, 3 data, 4 numeric.
int exit_status(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace deformclass
