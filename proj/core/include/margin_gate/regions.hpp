#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "margin_gate/freqresp.hpp"
#include "margin_gate/margins.hpp"
#include "margin_gate/policy.hpp"

namespace margin_gate {

/// Angle wedges about the negative real axis, read at unit-circle crossings:
/// critical for PM < pm_min, caution for pm_min <= PM < pm_cau.
enum class Region { Critical, Caution, Compliant };

std::string_view to_string(Region r) noexcept;
Region region_from_string(std::string_view text);

Region classify_pm(double pm_deg, const MarginPolicy& policy) noexcept;

/// Throws NotOnUnitCircle when ||l| - 1| >= 1e-6.
Region classify_crossing(Complex l_value, const MarginPolicy& policy);

struct RegionVerdict {
    CrossoverPoint crossover;
    Region region = Region::Compliant;
};

struct GmCheck {
    CrossoverPoint crossover;
    bool violated = false;
};

/// Phase crossovers whose |L| lies outside the circle of radius 10^(-gm_min/20).
std::vector<GmCheck> gm_circle_check(std::span<const CrossoverPoint> phase_crossovers, const MarginPolicy& policy);

struct CriticalIntersection {
    bool violates = false;
    std::vector<RegionVerdict> offenders;
    std::vector<RegionVerdict> all;
};

CriticalIntersection critical_intersection(const FrequencyResponse& l, const MarginPolicy& policy);

struct ResolutionWarning {
    /// Negative or infinite bounds mark the closure segments of the contour.
    double f_lo_hz = 0.0;
    double f_hi_hz = 0.0;
    std::string reason;

    friend bool operator==(const ResolutionWarning&, const ResolutionWarning&) = default;
};

struct EncirclementResult {
    /// Clockwise encirclements of -1 + 0j.
    int winding = 0;
    double min_distance_to_critical_point = 0.0;
    std::vector<ResolutionWarning> resolution_warnings;

    friend bool operator==(const EncirclementResult&, const EncirclementResult&) = default;
};

/// Total signed angle (degrees, counter-clockwise positive) swept by p + 1
/// around a closed polygon; the last vertex connects back to the first.
double contour_angle_deg(std::span<const Complex> polygon);

/// Closed Nyquist contour for a positive-frequency locus: the samples, their
/// conjugate mirror in reverse order (negative frequencies), and straight
/// closures at both ends.
std::vector<Complex> nyquist_contour(const FrequencyResponse& l);

/// Clockwise encirclements of -1. Throws CriticalPointOnLocus when a sample is
/// within 1e-12 of -1 and AmbiguousWinding when the angle total is not within
/// 0.01 turns of an integer.
EncirclementResult winding_number(const FrequencyResponse& l);

}  // namespace margin_gate
