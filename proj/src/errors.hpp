#pragma once

#include <stdexcept>
#include <string>

namespace ttsa {

enum class ErrorCode {
    ConfigError,
    DimensionMismatch,
    InvalidArgument,
    NotHurwitz,
    Singular,
    NotErgodic,
    Diverged,
    MissingNoiseLog,
    DegenerateCloud,
    InsufficientGrid,
    NoiseFloorViolated,
    AssumptionViolated,
    SingularFeatureGram,
    NumericalFailure,
    Internal,
};

/// Exit-code class of an error: 2 config, 3 numerical, 4 strict-check failure.
inline int exit_class(ErrorCode c) {
    switch (c) {
    case ErrorCode::ConfigError:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::InvalidArgument:
        return 2;
    case ErrorCode::NoiseFloorViolated:
    case ErrorCode::AssumptionViolated:
        return 4;
    default:
        return 3;
    }
}

inline const char* error_code_name(ErrorCode c) {
    switch (c) {
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NotHurwitz: return "NotHurwitz";
    case ErrorCode::Singular: return "Singular";
    case ErrorCode::NotErgodic: return "NotErgodic";
    case ErrorCode::Diverged: return "Diverged";
    case ErrorCode::MissingNoiseLog: return "MissingNoiseLog";
    case ErrorCode::DegenerateCloud: return "DegenerateCloud";
    case ErrorCode::InsufficientGrid: return "InsufficientGrid";
    case ErrorCode::NoiseFloorViolated: return "NoiseFloorViolated";
    case ErrorCode::AssumptionViolated: return "AssumptionViolated";
    case ErrorCode::SingularFeatureGram: return "SingularFeatureGram";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::Internal: return "Internal";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

}  // namespace ttsa
