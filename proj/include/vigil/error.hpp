#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vigil {

enum class Errc {
  // signal-io
  EmptyFile,
  MalformedHeader,
  RaggedRows,
  NonNumericSample,
  NonMonotonicTimestamps,
  UnknownState,
  RepeatedState,
  InvalidDuration,
  AliasedComponent,
  InvalidSpec,
  // dsp / features
  TooShort,
  BandAboveNyquist,
  RecordTooShort,
  InvalidPlan,
  MissingChannel,
  // clustering / fuzzy
  EmptyInput,
  DegenerateInput,
  InvalidConfig,
  BadCalibration,
  // vision
  SchemaError,
  RectOutOfWindow,
  NotStumpBased,
  EmptyImage,
  ImageSmallerThanWindow,
  ImageFormat,
  TimestampRegression,
  // fusion / pipeline
  OutOfDomainLevel,
  DurationMismatch,
  InvalidSpeed,
  IoError,
};

std::string_view errc_name(Errc code) noexcept;

// All library failures are reported through this exception; `code()` identifies
// the failure kind, `what()` carries the human-readable context.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code), detail_(message) {}

  Errc code() const noexcept { return code_; }

  // The message without the error-kind prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  Errc code_;
  std::string detail_;
};

}  // namespace vigil
