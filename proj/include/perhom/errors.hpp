#pragma once

#include <stdexcept>
#include <string>

namespace perhom {

enum class ErrorCode {
    InvalidArgument,
    DimensionMismatch,
    GridMismatch,
    Parse,
    ModelInvalid,
    QuadratureUnavailable,
    ResolutionTooCoarse,
    PositivityUnachievable,
    ReducibleGenerator,
    NoConvergence,
    HorizonTooShort,
    IncompatibleRhs,
    SingularSystem,
    CorrectorResidualTooLarge,
    CholeskyFailure,
    StepTooLarge,
    MissingCorrector,
    InsufficientPaths,
    InsufficientEpsilons,
};

/// Stable kebab-case name, used in reports and CLI diagnostics.
const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what);

    ErrorCode code() const noexcept { return code_; }

protected:
    struct RawMessage {};
    Error(ErrorCode code, const std::string& message, RawMessage);

private:
    ErrorCode code_;
};

/// Error raised inside a pipeline stage; carries the stage name for reports.
class StageError : public Error {
public:
    StageError(std::string stage, const Error& cause);

    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

}  // namespace perhom
