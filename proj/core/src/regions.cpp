#include "margin_gate/regions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "margin_gate/angles.hpp"
#include "margin_gate/error.hpp"
#include "text_util.hpp"

namespace margin_gate {

std::string_view to_string(Region r) noexcept {
    switch (r) {
        case Region::Critical: return "critical";
        case Region::Caution: return "caution";
        case Region::Compliant: return "compliant";
    }
    return "compliant";
}

Region region_from_string(std::string_view text) {
    if (text == "critical") return Region::Critical;
    if (text == "caution") return Region::Caution;
    if (text == "compliant") return Region::Compliant;
    throw Error(ErrorCode::InvalidArgument, "unknown region '" + std::string(text) + "'");
}

Region classify_pm(double pm_deg, const MarginPolicy& policy) noexcept {
    if (pm_deg < policy.pm_min_deg) return Region::Critical;
    if (pm_deg < policy.pm_cau_deg) return Region::Caution;
    return Region::Compliant;
}

Region classify_crossing(Complex l_value, const MarginPolicy& policy) {
    if (std::abs(std::abs(l_value) - 1.0) >= 1e-6) {
        throw Error(ErrorCode::NotOnUnitCircle,
                    "|L| = " + detail::format_double(std::abs(l_value)) + " is not on the unit circle");
    }
    return classify_pm(normalize_deg(180.0 + arg_deg(l_value)), policy);
}

std::vector<GmCheck> gm_circle_check(std::span<const CrossoverPoint> phase_crossovers, const MarginPolicy& policy) {
    const double radius = policy.gm_circle_radius();
    std::vector<GmCheck> out;
    out.reserve(phase_crossovers.size());
    for (const auto& cp : phase_crossovers) {
        if (cp.kind != CrossoverKind::Phase) {
            throw Error(ErrorCode::KindMismatch, "gain-margin circle applies to phase crossovers only");
        }
        out.push_back(GmCheck{cp, std::abs(cp.l_value) > radius});
    }
    return out;
}

CriticalIntersection critical_intersection(const FrequencyResponse& l, const MarginPolicy& policy) {
    policy.validate();
    CriticalIntersection out;
    for (const auto& cp : find_crossovers(l, CrossoverKind::Gain)) {
        RegionVerdict rv{cp, classify_pm(*cp.pm_deg, policy)};
        if (rv.region == Region::Critical) {
            out.violates = true;
            out.offenders.push_back(rv);
        }
        out.all.push_back(std::move(rv));
    }
    return out;
}

double contour_angle_deg(std::span<const Complex> polygon) {
    double total = 0.0;
    const Complex one(1.0, 0.0);
    for (std::size_t i = 0; i < polygon.size(); ++i) {
        const Complex a = polygon[i] + one;
        const Complex b = polygon[(i + 1) % polygon.size()] + one;
        total += std::arg(b / a);
    }
    return total * kDegPerRad;
}

std::vector<Complex> nyquist_contour(const FrequencyResponse& l) {
    std::vector<Complex> contour(l.samples().begin(), l.samples().end());
    contour.reserve(2 * l.size());
    for (std::size_t i = l.size(); i-- > 0;) contour.push_back(std::conj(l[i]));
    return contour;
}

namespace {

double distance_to_segment(Complex p, Complex a, Complex b) {
    const Complex ab = b - a;
    const double len2 = std::norm(ab);
    if (len2 == 0.0) return std::abs(p - a);
    const double t = std::clamp(((p - a) * std::conj(ab)).real() / len2, 0.0, 1.0);
    return std::abs(p - (a + t * ab));
}

}  // namespace

EncirclementResult winding_number(const FrequencyResponse& l) {
    const Complex critical(-1.0, 0.0);
    const auto& grid = l.grid();
    EncirclementResult result;
    result.min_distance_to_critical_point = std::numeric_limits<double>::infinity();

    for (std::size_t i = 0; i < l.size(); ++i) {
        const double d = std::abs(l[i] - critical);
        if (d < 1e-12) {
            throw Error(ErrorCode::CriticalPointOnLocus,
                        "locus passes through -1 at " + detail::format_double(grid[i]) + " Hz");
        }
        result.min_distance_to_critical_point = std::min(result.min_distance_to_critical_point, d);
        if (i + 1 < l.size()) {
            const double step = std::abs(std::arg((l[i + 1] + 1.0) / (l[i] + 1.0))) * kDegPerRad;
            if (step > 90.0) {
                result.resolution_warnings.push_back(
                    {grid[i], grid[i + 1], "angle step about -1 exceeds 90 deg; locus may be under-sampled"});
            }
        }
    }

    // closures: conj(L(f_min)) -> L(f_min) and L(f_max) -> conj(L(f_max))
    const Complex lo = l[0];
    const Complex hi = l[l.size() - 1];
    const double d_lo = distance_to_segment(critical, std::conj(lo), lo);
    const double d_hi = distance_to_segment(critical, hi, std::conj(hi));
    result.min_distance_to_critical_point = std::min({result.min_distance_to_critical_point, d_lo, d_hi});
    if (d_lo < 1e-12 || d_hi < 1e-12) {
        throw Error(ErrorCode::CriticalPointOnLocus, "contour closure passes through -1");
    }
    if (d_lo < 0.1) {
        result.resolution_warnings.push_back(
            {-grid.front(), grid.front(), "low-frequency closure passes within 0.1 of -1"});
    }
    if (d_hi < 0.1) {
        result.resolution_warnings.push_back({grid.back(), std::numeric_limits<double>::infinity(),
                                              "high-frequency closure passes within 0.1 of -1"});
    }

    const auto contour = nyquist_contour(l);
    const double turns = -contour_angle_deg(contour) / 360.0;
    const double rounded = std::round(turns);
    if (std::abs(turns - rounded) >= 0.01) {
        throw Error(ErrorCode::AmbiguousWinding,
                    "winding residual " + detail::format_double(std::abs(turns - rounded)) + " exceeds 0.01");
    }
    result.winding = static_cast<int>(rounded);
    return result;
}

}  // namespace margin_gate
