#pragma once

#include <stdexcept>
#include <string>

namespace seqgen {

enum class ErrorCode {
    InvalidArgument,
    TruncationLeak,
    UndefinedRatio,
    NoSteadyState,
    DimensionMismatch,
    EmptySupport,
    DegenerateSteadyState,
    SizeLimit,
    CutOutOfRange,
    InsufficientData,
    GrammarSyntax,
    CnfViolation,
    WeightNormalization,
    UnknownTerminal,
    Geometry,
    WidthExhausted,
    CycleInvariant,
    AuditFailure,
    InsufficientEnsemble,
};

const char *to_string(ErrorCode code) noexcept;

/// Domain error raised by every seqgen module. The code identifies the
/// failure class; the message carries the module-specific detail.
class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string &message);

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string &message);

inline void require(bool condition, ErrorCode code, const std::string &message) {
    if (!condition) {
        fail(code, message);
    }
}

} // namespace seqgen
