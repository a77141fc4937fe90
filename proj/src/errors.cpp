#include "caplow/errors.hpp"

namespace caplow {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::NonPositiveArgument: return "NonPositiveArgument";
        case ErrorCode::OutOfTableRange: return "OutOfTableRange";
        case ErrorCode::DivergentAntiderivative: return "DivergentAntiderivative";
        case ErrorCode::ExponentOutOfRange: return "ExponentOutOfRange";
        case ErrorCode::EmptyMeasure: return "EmptyMeasure";
        case ErrorCode::GridTooCoarse: return "GridTooCoarse";
        case ErrorCode::NonConvex: return "NonConvex";
        case ErrorCode::MeshFailure: return "MeshFailure";
        case ErrorCode::NoConvergence: return "NoConvergence";
        case ErrorCode::StepFailure: return "StepFailure";
        case ErrorCode::ProbeInsideBody: return "ProbeInsideBody";
        case ErrorCode::PhiMismatch: return "PhiMismatch";
        case ErrorCode::NotConverged: return "NotConverged";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::ValidationError: return "ValidationError";
    }
    return "UnknownError";
}

} // namespace caplow
