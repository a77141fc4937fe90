// Error taxonomy shared by all caplow modules.
#pragma once

#include <stdexcept>
#include <string>

namespace caplow {

enum class ErrorCode {
    NonPositiveArgument,
    OutOfTableRange,
    DivergentAntiderivative,
    ExponentOutOfRange,
    EmptyMeasure,
    GridTooCoarse,
    NonConvex,
    MeshFailure,
    NoConvergence,
    StepFailure,
    ProbeInsideBody,
    PhiMismatch,
    NotConverged,
    ParseError,
    ValidationError,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

} // namespace caplow
