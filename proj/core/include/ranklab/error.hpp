#pragma once

#include <stdexcept>
#include <string>

namespace ranklab {

/// Machine-readable failure categories. The CLI maps these to exit codes:
/// input-shaped problems exit 1, exhausted budgets exit 2, internal
/// invariant violations exit 3 (always a bug).
enum class ErrorCode {
    InvalidSpec,
    InvalidDescriptor,
    StageMismatch,
    StageUnavailable,
    BudgetExceeded,
    CombinatorialBudget,
    NonmonotoneSpacers,
    NotExact,
    NotSidon,
    TooLarge,
    Unresolvable,
    RegionTooSmall,
    InfeasibleWindow,
    PieceCollision,
    OrbitExit,
    ParseError,
    InternalInvariant,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

/// Hard assertion for conditions the library guarantees by construction.
inline void require_internal(bool ok, const char* what) {
    if (!ok) fail(ErrorCode::InternalInvariant, what);
}

} // namespace ranklab
