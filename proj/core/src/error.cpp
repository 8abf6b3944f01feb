#include "nodal/error.hpp"

namespace nodal {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotProbability: return "NotProbability";
    case ErrorCode::SupportOutsideDisc: return "SupportOutsideDisc";
    case ErrorCode::NotPiInvariant: return "NotPiInvariant";
    case ErrorCode::UnknownPreset: return "UnknownPreset";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::NotOnCircle: return "NotOnCircle";
    case ErrorCode::EmptyGrid: return "EmptyGrid";
    case ErrorCode::DegenerateConditioning: return "DegenerateConditioning";
    case ErrorCode::DegenerateMeasure: return "DegenerateMeasure";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::NotSumOfTwoSquares: return "NotSumOfTwoSquares";
    case ErrorCode::ScheduleTooShort: return "ScheduleTooShort";
    case ErrorCode::DomainMismatch: return "DomainMismatch";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace nodal
