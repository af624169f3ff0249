#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace loopforge {

enum class ErrorCode {
    // geometry
    AngleNearPi,
    // descriptors / database / threshold
    InsufficientData,
    DimensionMismatch,
    NonMonotonicFrameId,
    NonFiniteScore,
    // verification
    TooFewPoints,
    DegenerateConfiguration,
    AllSamplesDegenerate,
    InsufficientInliers,
    // pose graph
    DisconnectedGraph,
    SingularNormalEquations,
    MissingKeyframe,
    MissingNode,
    // pipeline
    ProviderDesync,
    ConfigMismatch,
    MissingEvent,
    ReplayDivergence,
    // harness
    InvalidConfig,
    InvalidFrames,
    LengthMismatch,
    // io
    BadMagic,
    UnsupportedVersion,
    TruncatedPayload,
    TrailingData,
    DimMismatch,
    ParseError,
    ConfigSchemaError,
    IoError,
};

std::string_view to_string(ErrorCode code);
std::optional<ErrorCode> parse_error_code(std::string_view name);

/// Every failure raised by the library carries one of the codes above, so
/// callers can branch on the class of error without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace loopforge
