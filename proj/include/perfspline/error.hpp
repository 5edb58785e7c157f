#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace perfspline {

/// Machine-readable failure codes shared by every module and the CLI.
enum class ErrorCode {
    InvalidArgument,
    AllZero,
    JumpPoint,
    InfeasibleTargets,
    DegenerateLP,
    StationarityResidual,
    NullMultiplier,
    TooManySignChanges,
    MeanZeroViolation,
    KnotOrderViolation,
    NoConvergence,
    StalledLineSearch,
    ParseError,
    Io,
};

inline std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::AllZero: return "AllZero";
    case ErrorCode::JumpPoint: return "JumpPoint";
    case ErrorCode::InfeasibleTargets: return "InfeasibleTargets";
    case ErrorCode::DegenerateLP: return "DegenerateLP";
    case ErrorCode::StationarityResidual: return "StationarityResidual";
    case ErrorCode::NullMultiplier: return "NullMultiplier";
    case ErrorCode::TooManySignChanges: return "TooManySignChanges";
    case ErrorCode::MeanZeroViolation: return "MeanZeroViolation";
    case ErrorCode::KnotOrderViolation: return "KnotOrderViolation";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::StalledLineSearch: return "StalledLineSearch";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace perfspline
