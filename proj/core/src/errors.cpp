#include "seqgen/errors.hpp"

namespace seqgen {

const char *to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::TruncationLeak: return "truncation-leak";
    case ErrorCode::UndefinedRatio: return "undefined-ratio";
    case ErrorCode::NoSteadyState: return "no-normalizable-steady-state";
    case ErrorCode::DimensionMismatch: return "dimension-mismatch";
    case ErrorCode::EmptySupport: return "empty-support";
    case ErrorCode::DegenerateSteadyState: return "degenerate-steady-state";
    case ErrorCode::SizeLimit: return "size-limit";
    case ErrorCode::CutOutOfRange: return "cut-out-of-range";
    case ErrorCode::InsufficientData: return "insufficient-data";
    case ErrorCode::GrammarSyntax: return "grammar-syntax";
    case ErrorCode::CnfViolation: return "cnf-violation";
    case ErrorCode::WeightNormalization: return "weight-normalization";
    case ErrorCode::UnknownTerminal: return "unknown-terminal";
    case ErrorCode::Geometry: return "geometry";
    case ErrorCode::WidthExhausted: return "width-exhausted";
    case ErrorCode::CycleInvariant: return "cycle-invariant";
    case ErrorCode::AuditFailure: return "audit-failure";
    case ErrorCode::InsufficientEnsemble: return "insufficient-ensemble";
    }
    return "unknown";
}

Error::Error(ErrorCode code, const std::string &message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void fail(ErrorCode code, const std::string &message) { throw Error(code, message); }

} // namespace seqgen
