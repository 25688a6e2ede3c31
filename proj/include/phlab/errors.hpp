#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace phlab {

enum class ErrorCode {
    DomainError,
    ZeroVector,
    SingularMap,
    NotHyperbolic,
    NotUnimodular,
    RhoOutOfRange,
    IntegrationError,
    BadCollar,
    OutsideBox,
    ZeroClass,
    TransversalityFail,
    UnsupportedTwist,
    MissingSplitting,
    CapExceeded,
    PreconditionViolation,
    SplittingEstimationFailed,
    NoConvergence,
    NonTermination,
    DegenerateLinearization,
    ParseError,
    InvalidInput,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the library; `code()` identifies the failure.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace phlab
