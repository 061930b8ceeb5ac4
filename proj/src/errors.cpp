#include "perhom/errors.hpp"

namespace perhom {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "invalid-argument";
        case ErrorCode::DimensionMismatch: return "dimension-mismatch";
        case ErrorCode::GridMismatch: return "grid-mismatch";
        case ErrorCode::Parse: return "parse";
        case ErrorCode::ModelInvalid: return "model-invalid";
        case ErrorCode::QuadratureUnavailable: return "quadrature-unavailable";
        case ErrorCode::ResolutionTooCoarse: return "resolution-too-coarse";
        case ErrorCode::PositivityUnachievable: return "positivity-unachievable";
        case ErrorCode::ReducibleGenerator: return "reducible-generator";
        case ErrorCode::NoConvergence: return "no-convergence";
        case ErrorCode::HorizonTooShort: return "horizon-too-short";
        case ErrorCode::IncompatibleRhs: return "incompatible-rhs";
        case ErrorCode::SingularSystem: return "singular-system";
        case ErrorCode::CorrectorResidualTooLarge: return "corrector-residual-too-large";
        case ErrorCode::CholeskyFailure: return "cholesky-failure";
        case ErrorCode::StepTooLarge: return "step-too-large";
        case ErrorCode::MissingCorrector: return "missing-corrector";
        case ErrorCode::InsufficientPaths: return "insufficient-paths";
        case ErrorCode::InsufficientEpsilons: return "insufficient-epsilons";
    }
    return "unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

Error::Error(ErrorCode code, const std::string& message, RawMessage)
    : std::runtime_error(message), code_(code) {}

StageError::StageError(std::string stage, const Error& cause)
    : Error(cause.code(), "[" + stage + "] " + cause.what(), RawMessage{}), stage_(std::move(stage)) {}

}  // namespace perhom
