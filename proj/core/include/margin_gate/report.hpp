#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "margin_gate/freqresp.hpp"
#include "margin_gate/loopgain.hpp"
#include "margin_gate/margins.hpp"
#include "margin_gate/regions.hpp"
#include "margin_gate/speclimit.hpp"

namespace margin_gate {

inline constexpr std::string_view kReportSchema = "margin-gate/1";

struct CurveInfo {
    std::string role;
    CurveMeta meta;

    friend bool operator==(const CurveInfo&, const CurveInfo&) = default;
};

struct NamedDerivation {
    std::string curve;
    Derivation method = Derivation::Direct;
    std::vector<std::string> inputs;

    friend bool operator==(const NamedDerivation&, const NamedDerivation&) = default;
};

struct ReportInputs {
    std::vector<CurveInfo> curves;
    std::size_t grid_points = 0;
    double f_min_hz = 0.0;
    double f_max_hz = 0.0;
    std::vector<NamedDerivation> derivations;
    LimitMode limit_mode = LimitMode::DetectedCrossovers;
    std::vector<double> critical_freqs_hz;
    /// Preconditions the verdict relies on but that impedance data cannot prove.
    std::vector<std::string> assumptions;

    friend bool operator==(const ReportInputs&, const ReportInputs&) = default;
};

struct NamedEncirclement {
    std::string curve;
    EncirclementResult result;

    friend bool operator==(const NamedEncirclement&, const NamedEncirclement&) = default;
};

/// A labelled curve drawn by the SVG renderers. Not part of the JSON form.
struct PlotLocus {
    std::string name;
    FrequencyResponse curve;
};

struct AssessmentReport {
    ReportInputs inputs;
    MarginSummary l_old_summary;
    MarginSummary l_new_summary;
    std::vector<MarginDecomposition> decompositions;
    LimitCurve limit_curve;
    std::vector<ComplianceRecord> compliance;
    std::vector<NamedEncirclement> encirclements;
    double consistency_error = 0.0;
    Verdict overall_verdict = Verdict::Error;

    std::vector<PlotLocus> loci;
};

/// Worst of the new-loop-gain verdict, any compliance violation, and any
/// non-zero winding (which forces violation).
Verdict overall_verdict(const MarginSummary& l_new_summary, std::span<const ComplianceRecord> compliance,
                        std::span<const NamedEncirclement> encirclements);

/// Checks that the parts belong together and fills overall_verdict. Throws
/// InconsistentInputs otherwise.
AssessmentReport build_report(AssessmentReport parts);

enum class ReportFormat { Json, Markdown, NyquistSvg, BodeSvg };

std::string_view to_string(ReportFormat f) noexcept;
/// Throws UnsupportedFormat.
ReportFormat report_format_from_string(std::string_view text);
std::string_view file_extension(ReportFormat f) noexcept;

std::string render(const AssessmentReport& report, ReportFormat format);

/// Inverse of the JSON rendering (loci are not carried).
AssessmentReport report_from_json(std::string_view text);

/// Markdown table of compliance records, 2 decimals per value.
std::string compliance_markdown(std::span<const ComplianceRecord> records);

}  // namespace margin_gate
