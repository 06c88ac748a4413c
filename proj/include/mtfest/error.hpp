#pragma once

#include <stdexcept>
#include <string>

namespace mtfest {

enum class ErrorCode {
    InvalidArgument,
    UnsupportedFormat,
    CorruptFile,
    Io,
    EmptyResult,
    OutOfBounds,
    InvalidSpec,
    KernelTooLarge,
    InvalidPitch,
    TooFewPeriods,
    ImageTooSmall,
    EmptySector,
    NoLinearRegion,
    MissingHint,
    NonNegativeSlope,
    PoorFit,
    NoEdgeFound,
    EdgeTooAligned,
    NoPeak,
};

const char* to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI in particular) can map them onto exit statuses.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what);

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace mtfest
