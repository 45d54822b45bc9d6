#include "landscape/errors.hpp"

namespace landscape {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::InvalidActivation: return "InvalidActivation";
        case ErrorCode::InvalidLabels: return "InvalidLabels";
        case ErrorCode::NoAdmissibleTurningPoint: return "NoAdmissibleTurningPoint";
        case ErrorCode::NonConvergence: return "NonConvergence";
        case ErrorCode::AllRowsZero: return "AllRowsZero";
        case ErrorCode::PreconditionViolated: return "PreconditionViolated";
        case ErrorCode::SizingFailed: return "SizingFailed";
        case ErrorCode::WidthViolation: return "WidthViolation";
        case ErrorCode::StrictDecreaseNotAchieved: return "StrictDecreaseNotAchieved";
        case ErrorCode::BoundaryCell: return "BoundaryCell";
        case ErrorCode::NotEquivalent: return "NotEquivalent";
        case ErrorCode::AssumptionViolated: return "AssumptionViolated";
        case ErrorCode::GeneratorFailure: return "GeneratorFailure";
        case ErrorCode::Io: return "Io";
        case ErrorCode::Parse: return "Parse";
    }
    return "Unknown";
}

}  // namespace landscape
