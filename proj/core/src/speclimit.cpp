#include "margin_gate/speclimit.hpp"

#include <algorithm>
#include <cmath>

#include "margin_gate/angles.hpp"
#include "margin_gate/error.hpp"
#include "margin_gate/loopgain.hpp"
#include "text_util.hpp"

namespace margin_gate {

ImpedanceLimit impedance_limit(double z_net_old_mag_ohm, double pm_old_deg, const MarginPolicy& policy) {
    if (!(z_net_old_mag_ohm > 0.0) || !std::isfinite(z_net_old_mag_ohm)) {
        throw Error(ErrorCode::NonpositiveImpedanceMagnitude,
                    "|Z_net,old| must be positive, got " + detail::format_double(z_net_old_mag_ohm));
    }
    ImpedanceLimit out;
    out.delta_pm_deg = pm_old_deg - policy.pm_min_deg;
    if (out.delta_pm_deg <= 0.0) {
        out.flags.preexisting_violation = true;
        return out;
    }
    double half = 0.5 * out.delta_pm_deg;
    if (out.delta_pm_deg >= 180.0) {
        half = 90.0;
        out.flags.unconstrained = true;
    }
    out.z_limit_ohm = z_net_old_mag_ohm / (2.0 * sin_deg(half));
    return out;
}

double pm_old_at(const FrequencyResponse& l_old, double f_hz) {
    return normalize_deg(180.0 + arg_deg(value_at(l_old, f_hz)));
}

std::string_view to_string(LimitMode mode) noexcept {
    return mode == LimitMode::DetectedCrossovers ? "detected_crossovers" : "critical_frequencies";
}

LimitMode limit_mode_from_string(std::string_view text) {
    if (text == "detected_crossovers") return LimitMode::DetectedCrossovers;
    if (text == "critical_frequencies") return LimitMode::CriticalFrequencies;
    throw Error(ErrorCode::InvalidArgument, "unknown limit mode '" + std::string(text) + "'");
}

LimitCurve build_limit_curve(const FrequencyResponse& l_old, const FrequencyResponse& z_net_old,
                             std::span<const double> freqs, const MarginPolicy& policy, LimitMode mode,
                             const FrequencyResponse* rho_curve) {
    policy.validate();
    LimitCurve curve;
    curve.mode = mode;
    std::optional<FrequencyResponse> one_plus_rho;
    if (rho_curve) one_plus_rho = one_plus(*rho_curve);
    for (double f : freqs) {
        LimitEntry e;
        e.f_hz = f;
        e.pm_old_deg = pm_old_at(l_old, f);
        e.z_net_old_mag_ohm = std::abs(value_at(z_net_old, f));
        const ImpedanceLimit lim = impedance_limit(e.z_net_old_mag_ohm, e.pm_old_deg, policy);
        e.z_limit_ohm = lim.z_limit_ohm;
        e.delta_pm_deg = lim.delta_pm_deg;
        e.flags = lim.flags;
        if (one_plus_rho) {
            e.r_diag = std::abs(value_at(*one_plus_rho, f));
            e.flags.bound_caveat_r_lt_1 = *e.r_diag < 1.0;
        }
        curve.entries.push_back(e);
    }
    return curve;
}

std::vector<ComplianceRecord> check_compliance(const FrequencyResponse& z_new, const LimitCurve& limits) {
    std::vector<ComplianceRecord> out;
    out.reserve(limits.entries.size());
    for (const auto& e : limits.entries) {
        ComplianceRecord r;
        r.f_hz = e.f_hz;
        r.z_new_mag_ohm = std::abs(value_at(z_new, e.f_hz));
        r.z_limit_ohm = e.flags.preexisting_violation ? std::nullopt : e.z_limit_ohm;
        r.verdict = (r.z_limit_ohm && r.z_new_mag_ohm <= *r.z_limit_ohm) ? Verdict::Compliant : Verdict::Violation;
        out.push_back(r);
    }
    return out;
}

std::string compliance_table_csv(std::span<const ComplianceRecord> records) {
    std::string out = "freq_hz,z_new_ohm,z_limit_ohm,verdict\n";
    for (const auto& r : records) {
        out += detail::format_double(r.f_hz);
        out += ',';
        out += detail::format_double(r.z_new_mag_ohm);
        out += ',';
        if (r.z_limit_ohm) out += detail::format_double(*r.z_limit_ohm);
        out += ',';
        out += to_string(r.verdict);
        out += '\n';
    }
    return out;
}

}  // namespace margin_gate
