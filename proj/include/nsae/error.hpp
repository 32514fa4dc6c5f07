#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nsae {

enum class ErrorCode {
    DimensionMismatch,
    ZeroVector,
    NonFiniteValue,
    InvalidK,
    TooFewVectors,
    InvalidThreshold,
    InvalidNeighborMap,
    AsymmetricArchitecture,
    BadLayerSize,
    NonFiniteActivation,
    ShapeMismatch,
    EpochOutOfRange,
    EmptyPairs,
    IndexOutOfRange,
    NonFiniteLoss,
    SingleClass,
    LengthMismatch,
    DegenerateNormalization,
    InvalidConfig,
    InsufficientPairs,
    CorruptHeader,
    TruncatedPayload,
    DimInconsistent,
    ParseError,
    VersionMismatch,
    IoFailure,
};

// Coarse grouping used by the CLI to pick an exit status.
enum class ErrorCategory { Usage, Data, Numeric };

constexpr std::string_view to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::InvalidK: return "InvalidK";
    case ErrorCode::TooFewVectors: return "TooFewVectors";
    case ErrorCode::InvalidThreshold: return "InvalidThreshold";
    case ErrorCode::InvalidNeighborMap: return "InvalidNeighborMap";
    case ErrorCode::AsymmetricArchitecture: return "AsymmetricArchitecture";
    case ErrorCode::BadLayerSize: return "BadLayerSize";
    case ErrorCode::NonFiniteActivation: return "NonFiniteActivation";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::EpochOutOfRange: return "EpochOutOfRange";
    case ErrorCode::EmptyPairs: return "EmptyPairs";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::DegenerateNormalization: return "DegenerateNormalization";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InsufficientPairs: return "InsufficientPairs";
    case ErrorCode::CorruptHeader: return "CorruptHeader";
    case ErrorCode::TruncatedPayload: return "TruncatedPayload";
    case ErrorCode::DimInconsistent: return "DimInconsistent";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::IoFailure: return "IoFailure";
    }
    return "Unknown";
}

constexpr ErrorCategory category(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::NonFiniteValue:
    case ErrorCode::NonFiniteActivation:
    case ErrorCode::NonFiniteLoss:
    case ErrorCode::DegenerateNormalization:
        return ErrorCategory::Numeric;
    case ErrorCode::InvalidK:
    case ErrorCode::InvalidThreshold:
    case ErrorCode::InvalidConfig:
    case ErrorCode::AsymmetricArchitecture:
    case ErrorCode::BadLayerSize:
    case ErrorCode::EpochOutOfRange:
        return ErrorCategory::Usage;
    default:
        return ErrorCategory::Data;
    }
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& detail)
        : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code)
    {
    }

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& detail)
{
    throw Error(code, detail);
}

} // namespace nsae
