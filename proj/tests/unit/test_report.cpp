#include <doctest.h>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "margin_gate/error.hpp"
#include "margin_gate/margins.hpp"
#include "margin_gate/regions.hpp"
#include "margin_gate/report.hpp"
#include "margin_gate/speclimit.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"
#include "support/testing.hpp"

using namespace margin_gate;
namespace pt = boost::property_tree;

namespace {

const MarginPolicy kDefault{15.0, 30.0, 15.0};

/// A random but internally consistent set of report parts.
AssessmentReport random_parts(gen::Rng& rng) {
    AssessmentReport r;
    const MarginPolicy policy = rng.policy();
    r.inputs.f_min_hz = rng.log_uniform(0.5, 10.0);
    r.inputs.f_max_hz = rng.log_uniform(1e3, 1e5);
    r.inputs.grid_points = static_cast<std::size_t>(rng.integer(2, 20000));
    const char* roles[] = {"z_ppm_existing", "z_net_old", "z_ppm_new"};
    for (const char* role : roles) {
        CurveMeta meta;
        meta.sequence = rng.coin() ? Sequence::Positive : Sequence::Untagged;
        meta.label = std::string(role) + " \"quoted\" <" + std::to_string(rng.integer(0, 99)) + ">";
        meta.operating_point = rng.coin() ? "P=0.8 pu" : "";
        r.inputs.curves.push_back({role, meta});
    }
    r.inputs.derivations = {{"L_old", Derivation::Direct, {"z_net_old", "z_ppm_existing"}},
                            {"L_new", Derivation::Factored, {"L_old", "rho"}}};
    r.inputs.limit_mode = rng.coin() ? LimitMode::DetectedCrossovers : LimitMode::CriticalFrequencies;
    r.inputs.assumptions = {"no right-half-plane open-loop poles"};

    const auto freq = [&] { return rng.log_uniform(r.inputs.f_min_hz, r.inputs.f_max_hz); };
    const auto summary = [&] {
        MarginSummary s;
        s.policy = policy;
        const int n = rng.integer(0, 4);
        for (int k = 0; k < n; ++k) {
            CrossoverPoint c;
            c.f_hz = freq();
            if (rng.coin()) {
                c.kind = CrossoverKind::Gain;
                c.l_value = std::polar(1.0, rng.uniform(-std::numbers::pi, std::numbers::pi));
                c.pm_deg = margin_at(c.kind, c.l_value).pm_deg;
            } else {
                c.kind = CrossoverKind::Phase;
                c.l_value = Complex(-rng.log_uniform(0.01, 5.0), 0.0);
                const Margin m = margin_at(c.kind, c.l_value);
                c.gm_lin = m.gm_lin;
                c.gm_db = m.gm_db;
            }
            s.crossovers.push_back(c);
        }
        std::sort(s.crossovers.begin(), s.crossovers.end(),
                  [](const CrossoverPoint& a, const CrossoverPoint& b) { return a.f_hz < b.f_hz; });
        for (const auto& c : s.crossovers) {
            if (c.kind == CrossoverKind::Gain && (!s.worst_pm || *c.pm_deg < *s.worst_pm->pm_deg)) s.worst_pm = c;
            if (c.kind == CrossoverKind::Phase && (!s.worst_gm || std::abs(c.l_value) > std::abs(s.worst_gm->l_value)))
                s.worst_gm = c;
        }
        s.verdict = margin_verdict(s.crossovers, policy);
        return s;
    };
    r.l_old_summary = summary();
    r.l_new_summary = summary();

    for (int k = rng.integer(0, 3); k > 0; --k) {
        MarginDecomposition d;
        d.kind = rng.coin() ? CrossoverKind::Gain : CrossoverKind::Phase;
        d.f_hz = freq();
        d.pm_old_newgc_deg = rng.uniform(-180, 180);
        d.angle_one_plus_rho_deg = rng.uniform(-90, 90);
        d.pm_new_deg = rng.uniform(-180, 180);
        d.abs_one_plus_rho = rng.log_uniform(0.1, 10);
        d.l_old_mag = rng.log_uniform(0.1, 10);
        d.gm_new_lin = d.abs_one_plus_rho / d.l_old_mag;
        r.decompositions.push_back(d);
    }

    r.limit_curve.mode = r.inputs.limit_mode;
    for (int k = rng.integer(0, 5); k > 0; --k) {
        LimitEntry e;
        e.f_hz = freq();
        e.pm_old_deg = rng.uniform(-180, 180);
        e.z_net_old_mag_ohm = rng.log_uniform(0.1, 100);
        const ImpedanceLimit lim = impedance_limit(e.z_net_old_mag_ohm, e.pm_old_deg, policy);
        e.z_limit_ohm = lim.z_limit_ohm;
        e.delta_pm_deg = lim.delta_pm_deg;
        e.flags = lim.flags;
        if (rng.coin()) {
            e.r_diag = rng.log_uniform(0.1, 10);
            e.flags.bound_caveat_r_lt_1 = *e.r_diag < 1.0;
        }
        r.limit_curve.entries.push_back(e);

        ComplianceRecord c;
        c.f_hz = e.f_hz;
        c.z_new_mag_ohm = rng.log_uniform(0.1, 1000);
        c.z_limit_ohm = e.z_limit_ohm;
        c.verdict = e.z_limit_ohm && c.z_new_mag_ohm <= *e.z_limit_ohm ? Verdict::Compliant : Verdict::Violation;
        r.compliance.push_back(c);
        if (r.inputs.limit_mode == LimitMode::CriticalFrequencies) r.inputs.critical_freqs_hz.push_back(e.f_hz);
    }

    for (const char* name : {"L_old", "L_new"}) {
        EncirclementResult e;
        e.winding = rng.integer(0, 3) == 0 ? 2 : 0;
        e.min_distance_to_critical_point = rng.log_uniform(1e-3, 10);
        if (rng.coin()) e.resolution_warnings.push_back({freq(), std::numeric_limits<double>::infinity(), "closure"});
        if (rng.coin()) e.resolution_warnings.push_back({-1.0, 1.0, "low-frequency closure"});
        r.encirclements.push_back({name, e});
    }
    r.consistency_error = rng.log_uniform(1e-17, 1e-11);
    return r;
}

/// Loci and summaries from two analytic loop gains.
AssessmentReport plotted_report() {
    const auto g = FrequencyGrid::log_spaced(1.0, 1e4, 400);
    const auto l_old = oracle::sample(oracle::lowpass(2.0, 100.0, 1), g);
    const auto l_new = oracle::sample(oracle::lowpass(10.0, 100.0, 3), g);
    AssessmentReport r;
    r.inputs.grid_points = g.size();
    r.inputs.f_min_hz = g.front();
    r.inputs.f_max_hz = g.back();
    r.l_old_summary = summarize_margins(l_old, kDefault);
    r.l_new_summary = summarize_margins(l_new, kDefault);
    r.encirclements = {{"L_old", winding_number(l_old)}, {"L_new", winding_number(l_new)}};
    r.loci = {{"L_old", l_old}, {"L_new", l_new}};
    return build_report(std::move(r));
}

void collect(const pt::ptree& node, const std::string& tag, std::vector<pt::ptree>& out) {
    for (const auto& [name, child] : node) {
        if (name == tag) out.push_back(child);
        collect(child, tag, out);
    }
}

std::vector<pt::ptree> elements(const std::string& svg, const std::string& tag) {
    std::istringstream in(svg);
    pt::ptree tree;
    pt::read_xml(in, tree);
    std::vector<pt::ptree> out;
    collect(tree, tag, out);
    return out;
}

std::string attr(const pt::ptree& e, const std::string& name) { return e.get("<xmlattr>." + name, std::string()); }

ComplianceRecord table_row(double f, double z_new, double z_limit) {
    const auto g = FrequencyGrid({f * 0.5, f, f * 2.0});
    const FrequencyResponse z(g, std::vector<Complex>(3, Complex(0.0, z_new)));
    LimitCurve limits;
    limits.entries.push_back(LimitEntry{.f_hz = f, .z_limit_ohm = z_limit});
    return check_compliance(z, limits).at(0);
}

}  // namespace

TEST_SUITE("report") {

TEST_CASE("overall verdict lattice") {
    MarginSummary ok;
    ok.verdict = Verdict::Compliant;
    const std::vector<ComplianceRecord> good{{100.0, 1.0, 2.0, Verdict::Compliant}};
    const std::vector<NamedEncirclement> none{{"L_new", {}}};
    CHECK(overall_verdict(ok, good, none) == Verdict::Compliant);

    const std::vector<ComplianceRecord> bad{{100.0, 1.0, 2.0, Verdict::Compliant},
                                            {794.76, 70.03, 7.15, Verdict::Violation}};
    CHECK(overall_verdict(ok, bad, none) == Verdict::Violation);

    EncirclementResult two;
    two.winding = 2;
    const std::vector<NamedEncirclement> encircled{{"L_new", two}};
    CHECK(overall_verdict(ok, good, encircled) == Verdict::Violation);

    MarginSummary caution;
    caution.verdict = Verdict::Caution;
    CHECK(overall_verdict(caution, good, none) == Verdict::Caution);
}

TEST_CASE("property: adding a violation never improves the verdict") {
    gen::Rng rng(7001);
    for (int trial = 0; trial < 300; ++trial) {
        AssessmentReport r = random_parts(rng);
        const Verdict before = overall_verdict(r.l_new_summary, r.compliance, r.encirclements);
        r.compliance.push_back({1.0, 2.0, 1.0, Verdict::Violation});
        const Verdict after = overall_verdict(r.l_new_summary, r.compliance, r.encirclements);
        CHECK(static_cast<int>(after) >= static_cast<int>(before));
        CHECK(after == Verdict::Violation);
    }
}

TEST_CASE("build_report rejects mismatched parts") {
    gen::Rng rng(7002);
    AssessmentReport r = random_parts(rng);
    r.limit_curve.entries.push_back(LimitEntry{.f_hz = 5.0, .z_limit_ohm = 1.0});
    CHECK_ERROR_CODE(build_report(r), ErrorCode::InconsistentInputs);

    AssessmentReport p = random_parts(rng);
    p.l_old_summary.policy.pm_min_deg += 1.0;
    p.l_old_summary.policy.pm_cau_deg += 1.0;
    CHECK_ERROR_CODE(build_report(p), ErrorCode::InconsistentInputs);

    AssessmentReport c = random_parts(rng);
    c.consistency_error = std::nan("");
    CHECK_ERROR_CODE(build_report(c), ErrorCode::InconsistentInputs);
}

TEST_CASE("property: JSON round trip is lossless and byte-stable") {
    gen::Rng rng(7003);
    for (int trial = 0; trial < 200; ++trial) {
        const AssessmentReport r = build_report(random_parts(rng));
        const std::string text = render(r, ReportFormat::Json);
        const AssessmentReport back = report_from_json(text);
        CHECK(render(back, ReportFormat::Json) == text);
        CHECK(back.inputs == r.inputs);
        CHECK(back.l_old_summary == r.l_old_summary);
        CHECK(back.l_new_summary == r.l_new_summary);
        CHECK(back.decompositions == r.decompositions);
        CHECK(back.limit_curve == r.limit_curve);
        CHECK(back.compliance == r.compliance);
        CHECK(back.encirclements == r.encirclements);
        CHECK(back.consistency_error == r.consistency_error);
        CHECK(back.overall_verdict == r.overall_verdict);
    }
}

TEST_CASE("JSON layout") {
    gen::Rng rng(7004);
    const std::string text = render(build_report(random_parts(rng)), ReportFormat::Json);
    std::size_t last = 0;
    for (const char* key : {"\"schema\"", "\"inputs\"", "\"l_old\"", "\"l_new\"", "\"decompositions\"",
                            "\"limit_curve\"", "\"compliance\"", "\"encirclements\"", "\"consistency_error\"",
                            "\"overall_verdict\""}) {
        const std::size_t at = text.find(std::string("\n  ") + key);
        REQUIRE(at != std::string::npos);
        CHECK(at >= last);
        last = at;
    }
    CHECK(text.find("\"schema\": \"margin-gate/1\"") != std::string::npos);
    CHECK_ERROR_CODE(report_from_json("{\"schema\": \"margin-gate/0\"}"), ErrorCode::UnsupportedFormat);
    CHECK_ERROR_CODE(report_from_json("[1, 2"), ErrorCode::InvalidArgument);
}

TEST_CASE("margin entries carry the documented keys") {
    const std::string text = render(plotted_report(), ReportFormat::Json);
    for (const char* key : {"\"f_hz\"", "\"kind\"", "\"pm_deg\"", "\"gm_db\"", "\"region\""}) {
        CHECK(text.find(key) != std::string::npos);
    }
}

TEST_CASE("markdown compliance table") {
    const std::vector<ComplianceRecord> table1{
        table_row(354.07, 11.22, 201.27), table_row(561.60, 1.98, 22.03),  table_row(997.49, 24.85, 718.59),
        table_row(1370.00, 6.77, 101.72), table_row(1324.5, 7.88, 72.0),   table_row(2414.6, 2.09, 168.71),
    };
    const std::string md = compliance_markdown(table1);
    CHECK(md.find("| 354.07 | 11.22 | 201.27 | compliant |\n") != std::string::npos);
    CHECK(md.find("| 1324.50 | 7.88 | 72.00 | compliant |\n") != std::string::npos);
    CHECK(md == compliance_markdown(table1));
    CHECK(compliance_markdown({}) == "No compliance records.\n");
}

TEST_CASE("nyquist svg") {
    const AssessmentReport r = plotted_report();
    const std::string svg = render(r, ReportFormat::NyquistSvg);
    CHECK(svg == render(r, ReportFormat::NyquistSvg));

    int wedges = 0, loci = 0;
    for (const auto& p : elements(svg, "path")) {
        const std::string cls = attr(p, "class");
        if (cls.rfind("wedge", 0) == 0) ++wedges;
        if (cls == "locus") ++loci;
    }
    CHECK(wedges == 2);
    CHECK(loci == static_cast<int>(r.loci.size()));

    int gm_circles = 0;
    for (const auto& c : elements(svg, "circle")) {
        if (attr(c, "r") == "0.177828") {
            ++gm_circles;
            CHECK(attr(c, "class") == "gm-circle");
        }
    }
    CHECK(gm_circles == 1);
}

TEST_CASE("bode svg") {
    const AssessmentReport r = plotted_report();
    const std::string svg = render(r, ReportFormat::BodeSvg);
    int magnitude = 0, phase = 0;
    for (const auto& p : elements(svg, "path")) {
        if (attr(p, "class") == "magnitude") ++magnitude;
        if (attr(p, "class") == "phase") ++phase;
    }
    CHECK(magnitude == 2);
    CHECK(phase == 2);
}

TEST_CASE("property: random reports render valid SVG") {
    gen::Rng rng(7005);
    for (int trial = 0; trial < 20; ++trial) {
        AssessmentReport r = build_report(random_parts(rng));
        const auto g = rng.grid(static_cast<std::size_t>(rng.integer(2, 300)));
        const int curves = rng.integer(0, 3);
        for (int k = 0; k < curves; ++k) {
            r.loci.push_back({"curve <" + std::to_string(k) + "> & co", rng.response(g, Unit::Dimensionless)});
        }
        for (ReportFormat f : {ReportFormat::NyquistSvg, ReportFormat::BodeSvg}) {
            const std::string svg = render(r, f);
            CHECK_NOTHROW(elements(svg, "path"));
        }
        int loci = 0;
        for (const auto& p : elements(render(r, ReportFormat::NyquistSvg), "path")) loci += attr(p, "class") == "locus";
        CHECK(loci == curves);
    }
}

TEST_CASE("format names") {
    CHECK(report_format_from_string("nyquist_svg") == ReportFormat::NyquistSvg);
    CHECK(file_extension(ReportFormat::Markdown) == "report.md");
    CHECK_ERROR_CODE(report_format_from_string("pdf"), ErrorCode::UnsupportedFormat);
}

}  // TEST_SUITE
