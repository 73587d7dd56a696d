#include "margin_gate/pipeline.hpp"

#include <array>
#include <filesystem>

#include "margin_gate/error.hpp"
#include "margin_gate/loopgain.hpp"
#include "margin_gate/margins.hpp"
#include "margin_gate/regions.hpp"
#include "text_util.hpp"

namespace margin_gate {

namespace {

void set_stage(std::string* stage, const char* name) {
    if (stage != nullptr) *stage = name;
}

CurveMeta labelled(CurveMeta meta, const char* fallback) {
    if (meta.label.empty()) meta.label = fallback;
    return meta;
}

void require_consistent_sequences(const StudyInputs& in) {
    std::optional<Sequence> seen;
    for (const auto* r : {&in.z_ppm_existing, &in.z_net_old, &in.z_ppm_new}) {
        const Sequence s = r->meta().sequence;
        if (s == Sequence::Untagged) continue;
        if (seen && *seen != s) {
            throw Error(ErrorCode::InconsistentInputs, "inputs mix positive- and negative-sequence impedances");
        }
        seen = s;
    }
    for (const auto* r : {&in.z_ppm_existing, &in.z_net_old, &in.z_ppm_new}) {
        if (r->unit() != Unit::Ohm) {
            throw Error(ErrorCode::InconsistentInputs, "impedance input '" + r->meta().label + "' is dimensionless");
        }
    }
}

FrequencyResponse parallel_of(const FrequencyResponse& a, const FrequencyResponse& b, CurveMeta meta) {
    require_same_grid(a, b);
    std::vector<Complex> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = par(a[i], b[i]);
    return FrequencyResponse(a.grid(), std::move(out), std::move(meta));
}

std::vector<double> frequencies_of(const std::vector<CrossoverPoint>& crossovers, CrossoverKind kind) {
    std::vector<double> out;
    for (const auto& cp : crossovers) {
        if (cp.kind == kind) out.push_back(cp.f_hz);
    }
    return out;
}

}  // namespace

StudyInputs study_from_case(const CaseFixture& fixture) {
    const auto meta = [](const char* label) {
        CurveMeta m;
        m.label = label;
        return m;
    };
    return StudyInputs{eval_network(fixture.z_ppm_existing, fixture.grid, meta("z_ppm_existing")),
                       eval_network(fixture.z_net_old, fixture.grid, meta("z_net_old")),
                       eval_network(fixture.z_ppm_new, fixture.grid, meta("z_ppm_new"))};
}

AssessmentReport assess(const StudyInputs& inputs, const AssessmentOptions& options, std::string* stage) {
    set_stage(stage, "config");
    options.policy.validate();
    const MarginPolicy& policy = options.policy;
    if (options.limit_mode == LimitMode::CriticalFrequencies && options.critical_freqs_hz.empty()) {
        throw Error(ErrorCode::InvalidArgument, "critical-frequency mode needs at least one frequency");
    }

    set_stage(stage, "align");
    require_consistent_sequences(inputs);
    const std::array<FrequencyResponse, 3> raw{inputs.z_ppm_existing, inputs.z_net_old, inputs.z_ppm_new};
    auto aligned = align(raw);
    const FrequencyResponse z_ppm = aligned[0].with_meta(labelled(aligned[0].meta(), "z_ppm_existing"));
    const FrequencyResponse z_net_old = aligned[1].with_meta(labelled(aligned[1].meta(), "z_net_old"));
    const FrequencyResponse z_new = aligned[2].with_meta(labelled(aligned[2].meta(), "z_ppm_new"));
    const FrequencyGrid& grid = z_ppm.grid();

    set_stage(stage, "loopgain");
    const LoopGain l_old = loop_gain(z_net_old, z_ppm);
    const FrequencyResponse ratio = rho(z_net_old, z_new);
    CurveMeta net_new_meta = z_net_old.meta();
    net_new_meta.label = "z_net_new";
    const FrequencyResponse z_net_new = parallel_of(z_net_old, z_new, net_new_meta);
    const LoopGain l_new_direct = loop_gain(z_net_new, z_ppm);
    const LoopGainUpdate update = update_loop_gain(l_old.curve, ratio);
    const double consistency = consistency_error(l_new_direct.curve, update.l_new.curve);

    set_stage(stage, "margins");
    AssessmentReport parts;
    parts.l_old_summary = summarize_margins(l_old.curve, policy);
    parts.l_new_summary = summarize_margins(l_new_direct.curve, policy);
    for (const auto& cp : parts.l_new_summary.crossovers) {
        parts.decompositions.push_back(decompose_margins(l_old.curve, ratio, cp.f_hz, cp.kind));
    }

    set_stage(stage, "limit");
    std::vector<double> limit_freqs;
    if (options.limit_mode == LimitMode::CriticalFrequencies) {
        limit_freqs = options.critical_freqs_hz;
    } else {
        limit_freqs = frequencies_of(parts.l_new_summary.crossovers, CrossoverKind::Gain);
    }
    parts.limit_curve = build_limit_curve(l_old.curve, z_net_old, limit_freqs, policy, options.limit_mode, &ratio);

    set_stage(stage, "compliance");
    parts.compliance = check_compliance(z_new, parts.limit_curve);

    set_stage(stage, "regions");
    parts.encirclements.push_back({"L_old", winding_number(l_old.curve)});
    parts.encirclements.push_back({"L_new", winding_number(l_new_direct.curve)});

    set_stage(stage, "report");
    ReportInputs& ri = parts.inputs;
    ri.curves = {{"z_ppm_existing", z_ppm.meta()}, {"z_net_old", z_net_old.meta()}, {"z_ppm_new", z_new.meta()}};
    ri.grid_points = grid.size();
    ri.f_min_hz = grid.front();
    ri.f_max_hz = grid.back();
    ri.derivations = {
        {"L_old", Derivation::Direct, {"z_net_old", "z_ppm_existing"}},
        {"L_new", Derivation::Direct, {"z_net_new", "z_ppm_existing"}},
        {"L_new_factored", Derivation::Factored, {"L_old", "rho"}},
    };
    ri.limit_mode = options.limit_mode;
    if (options.limit_mode == LimitMode::CriticalFrequencies) ri.critical_freqs_hz = options.critical_freqs_hz;
    ri.assumptions = {
        "each subsystem is stable on its own (no right-half-plane poles in Z_ppm or 1/Z_net)",
        "balanced operation; sequence impedances are analysed as decoupled single-input single-output loops",
    };
    parts.consistency_error = consistency;
    parts.loci = {{"L_old", l_old.curve}, {"L_new", l_new_direct.curve}};
    return build_report(std::move(parts));
}

void RunConfig::validate() const {
    const bool files = z_ppm_existing_path || z_net_old_path || z_ppm_new_path;
    if (files && synth_path) {
        throw Error(ErrorCode::InvalidArgument, "give either the three impedance files or a synth case, not both");
    }
    if (!files && !synth_path) {
        throw Error(ErrorCode::InvalidArgument, "no inputs: give the three impedance files or a synth case");
    }
    if (files && !(z_ppm_existing_path && z_net_old_path && z_ppm_new_path)) {
        throw Error(ErrorCode::InvalidArgument, "file mode needs z_ppm_existing, z_net_old and z_ppm_new");
    }
    options.policy.validate();
    if (options.limit_mode == LimitMode::CriticalFrequencies && options.critical_freqs_hz.empty()) {
        throw Error(ErrorCode::InvalidArgument, "critical-frequency mode needs at least one frequency");
    }
    if (options.limit_mode == LimitMode::DetectedCrossovers && !options.critical_freqs_hz.empty()) {
        throw Error(ErrorCode::InvalidArgument, "critical frequencies given but limit mode is detected_crossovers");
    }
    if (!formats.empty() && out_dir.empty()) {
        throw Error(ErrorCode::InvalidArgument, "output formats requested without an output directory");
    }
}

int exit_code_for(Verdict v) noexcept {
    switch (v) {
        case Verdict::Compliant: return 0;
        case Verdict::Caution:
        case Verdict::Violation: return 1;
        case Verdict::Error: return 2;
    }
    return 2;
}

RunOutcome run_assessment(const RunConfig& cfg) {
    RunOutcome outcome;
    std::string stage = "config";
    try {
        cfg.validate();

        std::optional<StudyInputs> inputs;
        if (cfg.synth_path) {
            stage = "parse";
            const CaseFixture fixture = case_from_json(detail::read_file(*cfg.synth_path));
            stage = "synth";
            inputs = study_from_case(fixture);
        } else {
            stage = "parse";
            inputs = StudyInputs{read_response_file(*cfg.z_ppm_existing_path), read_response_file(*cfg.z_net_old_path),
                                 read_response_file(*cfg.z_ppm_new_path)};
        }

        AssessmentReport report = assess(*inputs, cfg.options, &stage);

        stage = "write";
        if (!cfg.formats.empty()) {
            std::filesystem::create_directories(cfg.out_dir);
            for (const ReportFormat f : cfg.formats) {
                const auto path = (std::filesystem::path(cfg.out_dir) / std::string(file_extension(f))).string();
                detail::write_file(path, render(report, f));
                outcome.written_files.push_back(path);
            }
        }
        outcome.exit_code = exit_code_for(report.overall_verdict);
        outcome.report = std::move(report);
    } catch (const std::exception& e) {
        outcome.exit_code = 2;
        outcome.failed_stage = stage;
        outcome.diagnostic = e.what();
        outcome.report.reset();
    }
    return outcome;
}

}  // namespace margin_gate
