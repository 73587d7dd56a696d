#pragma once

#include <optional>
#include <string>
#include <vector>

#include "margin_gate/freqresp.hpp"
#include "margin_gate/netsynth.hpp"
#include "margin_gate/policy.hpp"
#include "margin_gate/report.hpp"
#include "margin_gate/speclimit.hpp"

namespace margin_gate {

/// The three measured or synthesized impedances of one connection study.
struct StudyInputs {
    FrequencyResponse z_ppm_existing;
    FrequencyResponse z_net_old;
    FrequencyResponse z_ppm_new;
};

StudyInputs study_from_case(const CaseFixture& fixture);

struct AssessmentOptions {
    MarginPolicy policy;
    LimitMode limit_mode = LimitMode::DetectedCrossovers;
    /// Used only in CriticalFrequencies mode, where it must be non-empty.
    std::vector<double> critical_freqs_hz;
};

/// Full pipeline: align, loop gains (both constructions), margins old and new,
/// decompositions, limit curve, compliance, encirclements, report. When
/// `stage` is given it names the step in progress, so callers can attribute
/// an exception to it.
AssessmentReport assess(const StudyInputs& inputs, const AssessmentOptions& options, std::string* stage = nullptr);

struct RunConfig {
    std::optional<std::string> z_ppm_existing_path;
    std::optional<std::string> z_net_old_path;
    std::optional<std::string> z_ppm_new_path;
    /// Case file (three networks plus grid) evaluated instead of the tables.
    std::optional<std::string> synth_path;
    AssessmentOptions options;
    std::string out_dir;
    std::vector<ReportFormat> formats;

    /// Throws InvalidArgument or InvalidPolicy.
    void validate() const;
};

struct RunOutcome {
    std::optional<AssessmentReport> report;
    /// 0 compliant, 1 caution or violation, 2 input or processing error.
    int exit_code = 2;
    /// Empty on success, otherwise the stage that failed.
    std::string failed_stage;
    std::string diagnostic;
    std::vector<std::string> written_files;
};

int exit_code_for(Verdict v) noexcept;

/// Never throws; errors are reported through the outcome.
RunOutcome run_assessment(const RunConfig& cfg);

}  // namespace margin_gate
