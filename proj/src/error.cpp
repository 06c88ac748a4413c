#include "mtfest/error.hpp"

namespace mtfest {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::CorruptFile: return "CorruptFile";
    case ErrorCode::Io: return "Io";
    case ErrorCode::EmptyResult: return "EmptyResult";
    case ErrorCode::OutOfBounds: return "OutOfBounds";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::KernelTooLarge: return "KernelTooLarge";
    case ErrorCode::InvalidPitch: return "InvalidPitch";
    case ErrorCode::TooFewPeriods: return "TooFewPeriods";
    case ErrorCode::ImageTooSmall: return "ImageTooSmall";
    case ErrorCode::EmptySector: return "EmptySector";
    case ErrorCode::NoLinearRegion: return "NoLinearRegion";
    case ErrorCode::MissingHint: return "MissingHint";
    case ErrorCode::NonNegativeSlope: return "NonNegativeSlope";
    case ErrorCode::PoorFit: return "PoorFit";
    case ErrorCode::NoEdgeFound: return "NoEdgeFound";
    case ErrorCode::EdgeTooAligned: return "EdgeTooAligned";
    case ErrorCode::NoPeak: return "NoPeak";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

} // namespace mtfest
