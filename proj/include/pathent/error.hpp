#pragma once

#include <stdexcept>
#include <string>

namespace pathent {

enum class ErrorCode {
    SingularMatrix,
    NegativeSteadyState,
    ZeroInput,
    NonpositiveRate,
    NotADistribution,
    MaxJumpsExceeded,
    EmptyFeasibleSet,
    NonpositiveTarget,
    InvalidEfficiency,
    DimensionMismatch,
    ParseFailure,
    InvalidArgument,
};

inline const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::SingularMatrix: return "SINGULAR_MATRIX";
        case ErrorCode::NegativeSteadyState: return "NEGATIVE_STEADY_STATE";
        case ErrorCode::ZeroInput: return "ZERO_INPUT";
        case ErrorCode::NonpositiveRate: return "NONPOSITIVE_RATE";
        case ErrorCode::NotADistribution: return "NOT_A_DISTRIBUTION";
        case ErrorCode::MaxJumpsExceeded: return "MAX_JUMPS_EXCEEDED";
        case ErrorCode::EmptyFeasibleSet: return "EMPTY_FEASIBLE_SET";
        case ErrorCode::NonpositiveTarget: return "NONPOSITIVE_TARGET";
        case ErrorCode::InvalidEfficiency: return "INVALID_EFFICIENCY";
        case ErrorCode::DimensionMismatch: return "DIMENSION_MISMATCH";
        case ErrorCode::ParseFailure: return "PARSE_FAILURE";
        case ErrorCode::InvalidArgument: return "INVALID_ARGUMENT";
    }
    return "UNKNOWN";
}

/// Domain error with a machine-readable code; the CLI maps codes to exit status.
class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

} // namespace pathent
