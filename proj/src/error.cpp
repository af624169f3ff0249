#include "loopforge/error.hpp"

namespace loopforge {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::AngleNearPi: return "AngleNearPi";
        case ErrorCode::InsufficientData: return "InsufficientData";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::NonMonotonicFrameId: return "NonMonotonicFrameId";
        case ErrorCode::NonFiniteScore: return "NonFiniteScore";
        case ErrorCode::TooFewPoints: return "TooFewPoints";
        case ErrorCode::DegenerateConfiguration: return "DegenerateConfiguration";
        case ErrorCode::AllSamplesDegenerate: return "AllSamplesDegenerate";
        case ErrorCode::InsufficientInliers: return "InsufficientInliers";
        case ErrorCode::DisconnectedGraph: return "DisconnectedGraph";
        case ErrorCode::SingularNormalEquations: return "SingularNormalEquations";
        case ErrorCode::MissingKeyframe: return "MissingKeyframe";
        case ErrorCode::MissingNode: return "MissingNode";
        case ErrorCode::ProviderDesync: return "ProviderDesync";
        case ErrorCode::ConfigMismatch: return "ConfigMismatch";
        case ErrorCode::MissingEvent: return "MissingEvent";
        case ErrorCode::ReplayDivergence: return "ReplayDivergence";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::InvalidFrames: return "InvalidFrames";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::BadMagic: return "BadMagic";
        case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
        case ErrorCode::TruncatedPayload: return "TruncatedPayload";
        case ErrorCode::TrailingData: return "TrailingData";
        case ErrorCode::DimMismatch: return "DimMismatch";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::ConfigSchemaError: return "ConfigSchemaError";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

std::optional<ErrorCode> parse_error_code(std::string_view name) {
    for (int c = 0; c <= static_cast<int>(ErrorCode::IoError); ++c) {
        if (to_string(static_cast<ErrorCode>(c)) == name) {
            return static_cast<ErrorCode>(c);
        }
    }
    return std::nullopt;
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace loopforge
