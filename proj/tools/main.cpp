// margin-gate: command-line front end for the impedance-margin pipeline.

#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "margin_gate/error.hpp"
#include "margin_gate/loopgain.hpp"
#include "margin_gate/margins.hpp"
#include "margin_gate/netsynth.hpp"
#include "margin_gate/pipeline.hpp"
#include "margin_gate/regions.hpp"
#include "margin_gate/report.hpp"
#include "margin_gate/speclimit.hpp"

namespace fs = std::filesystem;
using namespace margin_gate;

namespace {

struct Style {
    bool enabled = false;
    [[nodiscard]] std::string paint(std::string_view text, const char* code) const {
        if (!enabled) return std::string(text);
        return std::string("\x1b[") + code + "m" + std::string(text) + "\x1b[0m";
    }
    [[nodiscard]] std::string verdict(Verdict v) const {
        switch (v) {
            case Verdict::Compliant: return paint(to_string(v), "32");
            case Verdict::Caution: return paint(to_string(v), "33");
            default: return paint(to_string(v), "1;31");
        }
    }
};

Style terminal_style() {
    Style s;
    s.enabled = std::getenv("MARGIN_GATE_NO_COLOR") == nullptr && isatty(fileno(stdout)) != 0;
    return s;
}

int fail(const std::string& stage, const std::string& message) {
    std::cerr << "margin-gate: error in stage '" << stage << "': " << message << "\n";
    return 2;
}

/// Runs `body`, mapping any exception to exit 2 with the current stage name.
template <typename F>
int guarded(std::string& stage, F&& body) {
    try {
        return body();
    } catch (const std::exception& e) {
        return fail(stage, e.what());
    }
}

struct PolicyFlags {
    MarginPolicy policy;
    void attach(CLI::App* cmd) {
        cmd->add_option("--pm-min-deg", policy.pm_min_deg, "Minimum phase margin (deg)")->capture_default_str();
        cmd->add_option("--pm-cau-deg", policy.pm_cau_deg, "Caution phase-margin threshold (deg)")
            ->capture_default_str();
        cmd->add_option("--gm-min-db", policy.gm_min_db, "Minimum gain margin (dB)")->capture_default_str();
    }
};

struct InputFlags {
    std::string z_ppm;
    std::string z_net_old;
    std::string z_new;
    std::string synth;

    void attach(CLI::App* cmd) {
        auto* a = cmd->add_option("--z-ppm", z_ppm, "Existing PPM impedance table");
        auto* b = cmd->add_option("--z-net-old", z_net_old, "Network impedance seen by the existing PPM");
        auto* c = cmd->add_option("--z-new", z_new, "New PPM impedance table");
        auto* s = cmd->add_option("--synth", synth, "Case file with three network descriptions and a grid");
        s->excludes(a)->excludes(b)->excludes(c);
    }

    void fill(RunConfig& cfg) const {
        if (!synth.empty()) {
            cfg.synth_path = synth;
            return;
        }
        if (!z_ppm.empty()) cfg.z_ppm_existing_path = z_ppm;
        if (!z_net_old.empty()) cfg.z_net_old_path = z_net_old;
        if (!z_new.empty()) cfg.z_ppm_new_path = z_new;
    }

    [[nodiscard]] StudyInputs load(std::string& stage) const {
        if (!synth.empty()) {
            stage = "parse";
            const CaseFixture fixture = case_from_json(read_text(synth));
            stage = "synth";
            return study_from_case(fixture);
        }
        stage = "parse";
        if (z_ppm.empty() || z_net_old.empty() || z_new.empty()) {
            throw Error(ErrorCode::InvalidArgument, "need --z-ppm, --z-net-old and --z-new, or --synth");
        }
        return StudyInputs{read_response_file(z_ppm), read_response_file(z_net_old), read_response_file(z_new)};
    }

    static std::string read_text(const std::string& path) {
        std::FILE* f = std::fopen(path.c_str(), "rb");
        if (f == nullptr) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
        std::string out;
        char buf[65536];
        std::size_t n = 0;
        while ((n = std::fread(buf, 1, sizeof buf, f)) > 0) out.append(buf, n);
        std::fclose(f);
        return out;
    }
};

struct LimitModeFlags {
    std::string mode = "detected_crossovers";
    std::vector<double> critical_freqs;

    void attach(CLI::App* cmd) {
        cmd->add_option("--limit-mode", mode,
                        "Where limits are evaluated: detected_crossovers or critical_frequencies")
            ->check(CLI::IsMember({"detected_crossovers", "critical_frequencies"}))
            ->capture_default_str();
        cmd->add_option("--critical-freqs", critical_freqs,
                        "Comma-separated critical frequencies in Hz (requires --limit-mode critical_frequencies)")
            ->delimiter(',');
    }

    void fill(AssessmentOptions& options) const {
        options.limit_mode = limit_mode_from_string(mode);
        options.critical_freqs_hz = critical_freqs;
    }
};

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::FILE* f = std::fopen(path.string().c_str(), "wb");
    if (f == nullptr) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
    const bool ok = std::fwrite(text.data(), 1, text.size(), f) == text.size();
    if (std::fclose(f) != 0 || !ok) throw Error(ErrorCode::Io, "short write to '" + path.string() + "'");
}

std::vector<ReportFormat> parse_formats(const std::vector<std::string>& names) {
    std::vector<ReportFormat> out;
    for (const auto& n : names) out.push_back(report_format_from_string(n));
    return out;
}

void print_summary(const AssessmentReport& r, const Style& style) {
    const auto pm = [](const MarginSummary& s) -> std::string {
        if (!s.worst_pm) return "none";
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.2f deg at %.2f Hz", *s.worst_pm->pm_deg, s.worst_pm->f_hz);
        return buf;
    };
    std::cout << "L_old worst PM: " << pm(r.l_old_summary) << " (" << style.verdict(r.l_old_summary.verdict) << ")\n";
    std::cout << "L_new worst PM: " << pm(r.l_new_summary) << " (" << style.verdict(r.l_new_summary.verdict) << ")\n";
    std::cout << "limit mode: " << to_string(r.limit_curve.mode) << "\n";
    if (!r.compliance.empty()) std::cout << compliance_markdown(r.compliance);
    for (const auto& e : r.encirclements) {
        std::cout << "winding(" << e.curve << ") = " << e.result.winding << "\n";
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3e", r.consistency_error);
    std::cout << "consistency error: " << buf << "\n";
    std::cout << "overall: " << style.verdict(r.overall_verdict) << "\n";
}

void note_verdict(Verdict v) {
    if (v == Verdict::Violation) std::cerr << "margin-gate: margin requirement violated\n";
    if (v == Verdict::Caution) std::cerr << "margin-gate: phase margin inside the caution band\n";
}

FrequencyGrid grid_from_flags(double f_min, double f_max, std::size_t points) {
    return FrequencyGrid::log_spaced(f_min, f_max, points);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Impedance-based margin assessment for paralleled power park modules"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "margin-gate 0.1.0");
    const Style style = terminal_style();

    // check
    auto* check = app.add_subcommand("check", "Run the full assessment and gate on the verdict");
    InputFlags check_in;
    PolicyFlags check_policy;
    LimitModeFlags check_limit;
    std::string check_out;
    std::vector<std::string> check_formats;
    check_in.attach(check);
    check_policy.attach(check);
    check_limit.attach(check);
    check->add_option("--out-dir", check_out, "Directory for report files");
    check->add_option("--format", check_formats, "json, markdown, nyquist_svg, bode_svg (default json)")
        ->delimiter(',');

    // loopgain
    auto* lg = app.add_subcommand("loopgain", "Compute L = Z_net / Z_ppm, optionally the post-connection L");
    std::string lg_net, lg_ppm, lg_new, lg_out;
    lg->add_option("--z-net-old", lg_net, "Network impedance table")->required();
    lg->add_option("--z-ppm", lg_ppm, "PPM impedance table")->required();
    lg->add_option("--z-new", lg_new, "New PPM impedance; output becomes L_new = L_old / (1 + rho)");
    lg->add_option("--out", lg_out, "Output table (stdout when omitted)");

    // margins
    auto* mg = app.add_subcommand("margins", "List crossovers and margins of a loop gain");
    std::string mg_l, mg_net, mg_ppm;
    PolicyFlags mg_policy;
    mg->add_option("--loop-gain", mg_l, "Dimensionless loop-gain table");
    auto* mg_net_opt = mg->add_option("--z-net-old", mg_net, "Network impedance table");
    mg->add_option("--z-ppm", mg_ppm, "PPM impedance table")->needs(mg_net_opt);
    mg_policy.attach(mg);

    // limit
    auto* lim = app.add_subcommand("limit", "Impedance limits for the new PPM and the compliance table");
    InputFlags lim_in;
    PolicyFlags lim_policy;
    LimitModeFlags lim_limit;
    std::string lim_format = "markdown";
    lim_in.attach(lim);
    lim_policy.attach(lim);
    lim_limit.attach(lim);
    lim->add_option("--format", lim_format, "markdown or csv")
        ->check(CLI::IsMember({"markdown", "csv"}))
        ->capture_default_str();

    // synth
    auto* syn = app.add_subcommand("synth", "Evaluate network descriptions to impedance tables");
    std::string syn_network, syn_case, syn_out;
    std::optional<std::uint64_t> syn_seed;
    int syn_strings = 3;
    double syn_fmin = 1.0, syn_fmax = 10000.0;
    std::size_t syn_points = kRandomCasePoints;
    auto* o_net = syn->add_option("--network", syn_network, "Single network description (JSON)");
    auto* o_case = syn->add_option("--case", syn_case, "Case file with three networks and a grid");
    auto* o_seed = syn->add_option("--seed", syn_seed, "Generate a random case from this seed");
    o_net->excludes(o_case)->excludes(o_seed);
    o_case->excludes(o_seed);
    syn->add_option("--strings", syn_strings, "PPM strings in a random case")->capture_default_str();
    syn->add_option("--f-min", syn_fmin, "Lowest grid frequency (Hz)")->capture_default_str();
    syn->add_option("--f-max", syn_fmax, "Highest grid frequency (Hz)")->capture_default_str();
    syn->add_option("--points", syn_points, "Grid points for --network")->capture_default_str();
    syn->add_option("--out-dir", syn_out, "Output directory")->required();

    // nyquist
    auto* nyq = app.add_subcommand("nyquist", "Render Nyquist (and optionally Bode) plots only");
    InputFlags nyq_in;
    PolicyFlags nyq_policy;
    std::string nyq_out;
    std::vector<std::string> nyq_formats{"nyquist_svg"};
    nyq_in.attach(nyq);
    nyq_policy.attach(nyq);
    nyq->add_option("--out-dir", nyq_out, "Output directory")->required();
    nyq->add_option("--format", nyq_formats, "nyquist_svg and/or bode_svg")->delimiter(',')->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return 2;
    }

    std::string stage = "config";

    if (check->parsed()) {
        RunConfig cfg;
        check_in.fill(cfg);
        cfg.options.policy = check_policy.policy;
        try {
            check_limit.fill(cfg.options);
            cfg.formats = parse_formats(check_formats);
        } catch (const std::exception& e) {
            return fail("config", e.what());
        }
        cfg.out_dir = check_out;
        if (!cfg.out_dir.empty() && cfg.formats.empty()) cfg.formats = {ReportFormat::Json};
        const RunOutcome outcome = run_assessment(cfg);
        if (!outcome.report) return fail(outcome.failed_stage, outcome.diagnostic);
        print_summary(*outcome.report, style);
        for (const auto& p : outcome.written_files) std::cout << "wrote " << p << "\n";
        note_verdict(outcome.report->overall_verdict);
        return outcome.exit_code;
    }

    if (lg->parsed()) {
        return guarded(stage, [&] {
            stage = "parse";
            auto curves = align(std::vector<FrequencyResponse>{read_response_file(lg_net), read_response_file(lg_ppm)});
            std::optional<FrequencyResponse> z_new;
            if (!lg_new.empty()) {
                auto with_new = align(std::vector<FrequencyResponse>{curves[0], curves[1], read_response_file(lg_new)});
                curves = {with_new[0], with_new[1]};
                z_new = with_new[2];
            }
            stage = "loopgain";
            FrequencyResponse l = loop_gain(curves[0], curves[1]).curve;
            if (z_new) l = update_loop_gain(l, rho(curves[0], *z_new)).l_new.curve;
            stage = "write";
            const std::string text = write_response(l);
            if (lg_out.empty()) {
                std::cout << text;
            } else {
                write_text(lg_out, text);
            }
            return 0;
        });
    }

    if (mg->parsed()) {
        return guarded(stage, [&] {
            stage = "parse";
            std::optional<FrequencyResponse> l;
            if (!mg_l.empty()) {
                if (!mg_net.empty()) throw Error(ErrorCode::InvalidArgument, "--loop-gain excludes --z-net-old");
                l = read_response_file(mg_l);
            } else {
                if (mg_net.empty() || mg_ppm.empty()) {
                    throw Error(ErrorCode::InvalidArgument, "need --loop-gain or --z-net-old with --z-ppm");
                }
                auto curves =
                    align(std::vector<FrequencyResponse>{read_response_file(mg_net), read_response_file(mg_ppm)});
                stage = "loopgain";
                l = loop_gain(curves[0], curves[1]).curve;
            }
            stage = "margins";
            const MarginSummary s = summarize_margins(*l, mg_policy.policy);
            std::cout << "kind,f_hz,pm_deg,gm_db\n";
            for (const auto& cp : s.crossovers) {
                char buf[160];
                if (cp.kind == CrossoverKind::Gain) {
                    std::snprintf(buf, sizeof buf, "gain,%.6f,%.6f,\n", cp.f_hz, *cp.pm_deg);
                } else {
                    std::snprintf(buf, sizeof buf, "phase,%.6f,,%.6f\n", cp.f_hz, *cp.gm_db);
                }
                std::cout << buf;
            }
            stage = "regions";
            const EncirclementResult w = winding_number(*l);
            std::cout << "winding: " << w.winding << "\n";
            for (const auto& warn : w.resolution_warnings) std::cerr << "margin-gate: warning: " << warn.reason << "\n";
            const Verdict v = w.winding != 0 ? Verdict::Violation : s.verdict;
            std::cout << "verdict: " << style.verdict(v) << "\n";
            note_verdict(v);
            return exit_code_for(v);
        });
    }

    if (lim->parsed()) {
        return guarded(stage, [&] {
            AssessmentOptions options;
            options.policy = lim_policy.policy;
            lim_limit.fill(options);
            if (options.limit_mode == LimitMode::DetectedCrossovers && !options.critical_freqs_hz.empty()) {
                throw Error(ErrorCode::InvalidArgument,
                            "critical frequencies given but limit mode is detected_crossovers");
            }
            const StudyInputs in = lim_in.load(stage);
            const AssessmentReport r = assess(in, options, &stage);
            stage = "write";
            if (lim_format == "csv") {
                std::cout << compliance_table_csv(r.compliance);
            } else {
                std::cout << compliance_markdown(r.compliance);
            }
            Verdict v = Verdict::Compliant;
            for (const auto& c : r.compliance) v = worst(v, c.verdict);
            note_verdict(v);
            return exit_code_for(v);
        });
    }

    if (syn->parsed()) {
        return guarded(stage, [&] {
            const fs::path out(syn_out);
            if (!syn_network.empty()) {
                stage = "parse";
                const NetworkElement net = network_from_json(InputFlags::read_text(syn_network));
                stage = "synth";
                CurveMeta meta;
                meta.label = fs::path(syn_network).stem().string();
                const auto resp = eval_network(net, grid_from_flags(syn_fmin, syn_fmax, syn_points), meta);
                stage = "write";
                const fs::path p = out / (meta.label + ".csv");
                write_text(p, write_response(resp));
                std::cout << "wrote " << p.string() << "\n";
                return 0;
            }
            std::optional<CaseFixture> fixture;
            if (!syn_case.empty()) {
                stage = "parse";
                fixture = case_from_json(InputFlags::read_text(syn_case));
            } else if (syn_seed) {
                stage = "synth";
                fixture = random_case(*syn_seed, syn_strings, syn_fmin, syn_fmax);
            } else {
                throw Error(ErrorCode::InvalidArgument, "need --network, --case or --seed");
            }
            stage = "synth";
            const StudyInputs in = study_from_case(*fixture);
            stage = "write";
            std::vector<std::pair<std::string, const FrequencyResponse*>> files{
                {"z_ppm_existing.csv", &in.z_ppm_existing},
                {"z_net_old.csv", &in.z_net_old},
                {"z_ppm_new.csv", &in.z_ppm_new}};
            if (syn_seed) {
                write_text(out / "case.json", case_to_json(*fixture));
                std::cout << "wrote " << (out / "case.json").string() << "\n";
            }
            for (const auto& [name, resp] : files) {
                write_text(out / name, write_response(*resp));
                std::cout << "wrote " << (out / name).string() << "\n";
            }
            return 0;
        });
    }

    if (nyq->parsed()) {
        return guarded(stage, [&] {
            AssessmentOptions options;
            options.policy = nyq_policy.policy;
            const auto formats = parse_formats(nyq_formats);
            for (const auto f : formats) {
                if (f != ReportFormat::NyquistSvg && f != ReportFormat::BodeSvg) {
                    throw Error(ErrorCode::UnsupportedFormat, "nyquist renders nyquist_svg or bode_svg only");
                }
            }
            const StudyInputs in = nyq_in.load(stage);
            const AssessmentReport r = assess(in, options, &stage);
            stage = "write";
            for (const auto f : formats) {
                const fs::path p = fs::path(nyq_out) / std::string(file_extension(f));
                write_text(p, render(r, f));
                std::cout << "wrote " << p.string() << "\n";
            }
            return 0;
        });
    }
    return 2;
}
