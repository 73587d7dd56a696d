#include "margin_gate/error.hpp"

namespace margin_gate {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::UnknownHeader: return "UnknownHeader";
        case ErrorCode::NonMonotonicFrequency: return "NonMonotonicFrequency";
        case ErrorCode::NonFiniteValue: return "NonFiniteValue";
        case ErrorCode::EmptyTable: return "EmptyTable";
        case ErrorCode::MalformedRow: return "MalformedRow";
        case ErrorCode::OutOfRange: return "OutOfRange";
        case ErrorCode::DisjointSpans: return "DisjointSpans";
        case ErrorCode::ZeroMagnitudeSample: return "ZeroMagnitudeSample";
        case ErrorCode::InvalidNetwork: return "InvalidNetwork";
        case ErrorCode::SingularAtFrequency: return "SingularAtFrequency";
        case ErrorCode::ResonanceSingular: return "ResonanceSingular";
        case ErrorCode::GenerationFailed: return "GenerationFailed";
        case ErrorCode::GridMismatch: return "GridMismatch";
        case ErrorCode::ZeroDenominator: return "ZeroDenominator";
        case ErrorCode::SingularSensitivity: return "SingularSensitivity";
        case ErrorCode::KindMismatch: return "KindMismatch";
        case ErrorCode::InvalidPolicy: return "InvalidPolicy";
        case ErrorCode::NonpositiveImpedanceMagnitude: return "NonpositiveImpedanceMagnitude";
        case ErrorCode::NotOnUnitCircle: return "NotOnUnitCircle";
        case ErrorCode::CriticalPointOnLocus: return "CriticalPointOnLocus";
        case ErrorCode::AmbiguousWinding: return "AmbiguousWinding";
        case ErrorCode::InconsistentInputs: return "InconsistentInputs";
        case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

}  // namespace margin_gate
