#include "phlab/errors.hpp"

namespace phlab {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::DomainError: return "DomainError";
        case ErrorCode::ZeroVector: return "ZeroVector";
        case ErrorCode::SingularMap: return "SingularMap";
        case ErrorCode::NotHyperbolic: return "NotHyperbolic";
        case ErrorCode::NotUnimodular: return "NotUnimodular";
        case ErrorCode::RhoOutOfRange: return "RhoOutOfRange";
        case ErrorCode::IntegrationError: return "IntegrationError";
        case ErrorCode::BadCollar: return "BadCollar";
        case ErrorCode::OutsideBox: return "OutsideBox";
        case ErrorCode::ZeroClass: return "ZeroClass";
        case ErrorCode::TransversalityFail: return "TransversalityFail";
        case ErrorCode::UnsupportedTwist: return "UnsupportedTwist";
        case ErrorCode::MissingSplitting: return "MissingSplitting";
        case ErrorCode::CapExceeded: return "CapExceeded";
        case ErrorCode::PreconditionViolation: return "PreconditionViolation";
        case ErrorCode::SplittingEstimationFailed: return "SplittingEstimationFailed";
        case ErrorCode::NoConvergence: return "NoConvergence";
        case ErrorCode::NonTermination: return "NonTermination";
        case ErrorCode::DegenerateLinearization: return "DegenerateLinearization";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::InvalidInput: return "InvalidInput";
    }
    return "Unknown";
}

}  // namespace phlab
