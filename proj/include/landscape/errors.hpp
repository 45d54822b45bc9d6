#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace landscape {

enum class ErrorCode {
    ShapeMismatch,
    InvalidActivation,
    InvalidLabels,
    NoAdmissibleTurningPoint,
    NonConvergence,
    AllRowsZero,
    PreconditionViolated,
    SizingFailed,
    WidthViolation,
    StrictDecreaseNotAchieved,
    BoundaryCell,
    NotEquivalent,
    AssumptionViolated,
    GeneratorFailure,
    Io,
    Parse,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI in particular) can map it onto an exit status.
class LandscapeError : public std::runtime_error {
public:
    LandscapeError(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace landscape
