#pragma once

#include <cmath>
#include <string_view>

namespace margin_gate {

/// Operator margin thresholds. Defaults are the offshore requirement
/// (PM 15 deg, GM 15 dB) with a 30 deg caution threshold.
struct MarginPolicy {
    double pm_min_deg = 15.0;
    double pm_cau_deg = 30.0;
    double gm_min_db = 15.0;

    /// Throws InvalidPolicy unless 0 < pm_min <= pm_cau < 180 and gm_min >= 0.
    void validate() const;

    [[nodiscard]] double gm_min_lin() const noexcept { return std::pow(10.0, gm_min_db / 20.0); }
    /// Radius of the gain-margin circle in the Nyquist plane.
    [[nodiscard]] double gm_circle_radius() const noexcept { return std::pow(10.0, -gm_min_db / 20.0); }

    friend bool operator==(const MarginPolicy&, const MarginPolicy&) = default;
};

enum class Verdict { Compliant, Caution, Violation, Error };

std::string_view to_string(Verdict v) noexcept;
Verdict verdict_from_string(std::string_view text);

/// The worse of two verdicts (compliant < caution < violation < error).
constexpr Verdict worst(Verdict a, Verdict b) noexcept {
    return static_cast<int>(a) >= static_cast<int>(b) ? a : b;
}

}  // namespace margin_gate
