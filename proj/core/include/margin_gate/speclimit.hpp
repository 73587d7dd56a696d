#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "margin_gate/freqresp.hpp"
#include "margin_gate/policy.hpp"

namespace margin_gate {

struct LimitFlags {
    /// Headroom <= 0: the existing plant already misses pm_min; no limit exists.
    bool preexisting_violation = false;
    /// |1 + rho| < 1 at this frequency; the geometric bound behind the limit is
    /// not guaranteed in this regime.
    bool bound_caveat_r_lt_1 = false;
    /// Headroom >= 180 deg; the sine argument was clamped at 90 deg.
    bool unconstrained = false;

    friend bool operator==(const LimitFlags&, const LimitFlags&) = default;
};

struct ImpedanceLimit {
    /// Absent when preexisting_violation is set.
    std::optional<double> z_limit_ohm;
    double delta_pm_deg = 0.0;
    LimitFlags flags;
};

/// Maximum allowable |Z_new| = |Z_net,old| / (2 sin(dPM/2)), dPM = PM_old - pm_min.
ImpedanceLimit impedance_limit(double z_net_old_mag_ohm, double pm_old_deg, const MarginPolicy& policy);

/// 180 + angle L_old(f), normalized to (-180, 180].
double pm_old_at(const FrequencyResponse& l_old, double f_hz);

struct LimitEntry {
    double f_hz = 0.0;
    double pm_old_deg = 0.0;
    double z_net_old_mag_ohm = 0.0;
    std::optional<double> z_limit_ohm;
    double delta_pm_deg = 0.0;
    std::optional<double> r_diag;
    LimitFlags flags;

    friend bool operator==(const LimitEntry&, const LimitEntry&) = default;
};

enum class LimitMode { DetectedCrossovers, CriticalFrequencies };

std::string_view to_string(LimitMode mode) noexcept;
LimitMode limit_mode_from_string(std::string_view text);

struct LimitCurve {
    LimitMode mode = LimitMode::DetectedCrossovers;
    std::vector<LimitEntry> entries;

    friend bool operator==(const LimitCurve&, const LimitCurve&) = default;
};

/// Limit at each frequency of `freqs`. When `rho_curve` is given, r = |1+rho|
/// is recorded and the r < 1 caveat flagged.
LimitCurve build_limit_curve(const FrequencyResponse& l_old, const FrequencyResponse& z_net_old,
                             std::span<const double> freqs, const MarginPolicy& policy, LimitMode mode,
                             const FrequencyResponse* rho_curve = nullptr);

struct ComplianceRecord {
    double f_hz = 0.0;
    double z_new_mag_ohm = 0.0;
    std::optional<double> z_limit_ohm;
    Verdict verdict = Verdict::Compliant;

    friend bool operator==(const ComplianceRecord&, const ComplianceRecord&) = default;
};

/// One record per limit frequency: compliant iff |Z_new(f)| <= Z_limit(f).
std::vector<ComplianceRecord> check_compliance(const FrequencyResponse& z_new, const LimitCurve& limits);

/// `freq_hz,z_new_ohm,z_limit_ohm,verdict` table; an absent limit is an empty field.
std::string compliance_table_csv(std::span<const ComplianceRecord> records);

}  // namespace margin_gate
