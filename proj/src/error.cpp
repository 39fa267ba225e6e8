#include "vigil/error.hpp"

namespace vigil {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::EmptyFile: return "EmptyFile";
    case Errc::MalformedHeader: return "MalformedHeader";
    case Errc::RaggedRows: return "RaggedRows";
    case Errc::NonNumericSample: return "NonNumericSample";
    case Errc::NonMonotonicTimestamps: return "NonMonotonicTimestamps";
    case Errc::UnknownState: return "UnknownState";
    case Errc::RepeatedState: return "RepeatedState";
    case Errc::InvalidDuration: return "InvalidDuration";
    case Errc::AliasedComponent: return "AliasedComponent";
    case Errc::InvalidSpec: return "InvalidSpec";
    case Errc::TooShort: return "TooShort";
    case Errc::BandAboveNyquist: return "BandAboveNyquist";
    case Errc::RecordTooShort: return "RecordTooShort";
    case Errc::InvalidPlan: return "InvalidPlan";
    case Errc::MissingChannel: return "MissingChannel";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::DegenerateInput: return "DegenerateInput";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::BadCalibration: return "BadCalibration";
    case Errc::SchemaError: return "SchemaError";
    case Errc::RectOutOfWindow: return "RectOutOfWindow";
    case Errc::NotStumpBased: return "NotStumpBased";
    case Errc::EmptyImage: return "EmptyImage";
    case Errc::ImageSmallerThanWindow: return "ImageSmallerThanWindow";
    case Errc::ImageFormat: return "ImageFormat";
    case Errc::TimestampRegression: return "TimestampRegression";
    case Errc::OutOfDomainLevel: return "OutOfDomainLevel";
    case Errc::DurationMismatch: return "DurationMismatch";
    case Errc::InvalidSpeed: return "InvalidSpeed";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace vigil
