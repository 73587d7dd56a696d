#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace margin_gate {

enum class ErrorCode {
    // freqresp
    UnknownHeader,
    NonMonotonicFrequency,
    NonFiniteValue,
    EmptyTable,
    MalformedRow,
    OutOfRange,
    DisjointSpans,
    ZeroMagnitudeSample,
    // netsynth
    InvalidNetwork,
    SingularAtFrequency,
    ResonanceSingular,
    GenerationFailed,
    // loopgain / margins
    GridMismatch,
    ZeroDenominator,
    SingularSensitivity,
    KindMismatch,
    // speclimit / regions
    InvalidPolicy,
    NonpositiveImpedanceMagnitude,
    NotOnUnitCircle,
    CriticalPointOnLocus,
    AmbiguousWinding,
    // report / pipeline
    InconsistentInputs,
    UnsupportedFormat,
    InvalidArgument,
    Io,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library. `code()` is stable and testable; the
/// message is for humans.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace margin_gate
