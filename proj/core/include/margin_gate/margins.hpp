#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "margin_gate/freqresp.hpp"
#include "margin_gate/policy.hpp"

namespace margin_gate {

enum class CrossoverKind { Gain, Phase };

std::string_view to_string(CrossoverKind kind) noexcept;
CrossoverKind crossover_kind_from_string(std::string_view text);

/// A gain crossover (|L| = 1, carries the phase margin) or a phase crossover
/// (angle L = -180 deg, carries the gain margin).
struct CrossoverPoint {
    CrossoverKind kind = CrossoverKind::Gain;
    double f_hz = 0.0;
    Complex l_value;
    std::optional<double> pm_deg;
    std::optional<double> gm_lin;
    std::optional<double> gm_db;

    friend bool operator==(const CrossoverPoint&, const CrossoverPoint&) = default;
};

struct Margin {
    std::optional<double> pm_deg;
    std::optional<double> gm_lin;
    std::optional<double> gm_db;
};

/// Gain kind: PM = 180 + angle L, normalized to (-180, 180]. Phase kind:
/// GM = 1/|L| (also in dB). Throws KindMismatch when the value does not sit
/// on the unit circle (gain, 1e-6) or on the negative real axis (phase, 1e-6 deg).
Margin margin_at(CrossoverKind kind, Complex l_value);

/// Every crossing of the interpolated curve, refined by bisection and sorted
/// by frequency. Crossings closer than 1e-6 relative are merged.
std::vector<CrossoverPoint> find_crossovers(const FrequencyResponse& l, CrossoverKind kind);

/// Margins of L_new rebuilt from the pre-connection loop gain at one frequency.
struct MarginDecomposition {
    CrossoverKind kind = CrossoverKind::Gain;
    double f_hz = 0.0;
    /// 180 + angle L_old(f); L_old need not have unit magnitude at f.
    double pm_old_newgc_deg = 0.0;
    double angle_one_plus_rho_deg = 0.0;
    double pm_new_deg = 0.0;
    double gm_new_lin = 0.0;
    double abs_one_plus_rho = 0.0;
    double l_old_mag = 0.0;

    friend bool operator==(const MarginDecomposition&, const MarginDecomposition&) = default;
};

MarginDecomposition decompose_margins(const FrequencyResponse& l_old, const FrequencyResponse& rho, double f_hz,
                                      CrossoverKind kind);

struct MarginSummary {
    std::vector<CrossoverPoint> crossovers;
    std::optional<CrossoverPoint> worst_pm;
    std::optional<CrossoverPoint> worst_gm;
    MarginPolicy policy;
    Verdict verdict = Verdict::Compliant;

    friend bool operator==(const MarginSummary&, const MarginSummary&) = default;
};

/// Verdict for a set of crossovers: violation when the worst PM is below
/// pm_min or any GM is below gm_min; caution when the worst PM is below pm_cau.
Verdict margin_verdict(const std::vector<CrossoverPoint>& crossovers, const MarginPolicy& policy);

MarginSummary summarize_margins(const FrequencyResponse& l, const MarginPolicy& policy);

}  // namespace margin_gate
