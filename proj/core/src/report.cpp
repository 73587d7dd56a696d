#include "margin_gate/report.hpp"

#include <cmath>
#include <limits>

#include <json.hpp>

#include "margin_gate/error.hpp"
#include "svg.hpp"
#include "text_util.hpp"

namespace margin_gate {

using json = nlohmann::ordered_json;

Verdict overall_verdict(const MarginSummary& l_new_summary, std::span<const ComplianceRecord> compliance,
                        std::span<const NamedEncirclement> encirclements) {
    Verdict v = l_new_summary.verdict;
    for (const auto& r : compliance) {
        if (r.verdict == Verdict::Violation) v = worst(v, Verdict::Violation);
    }
    for (const auto& e : encirclements) {
        if (e.result.winding != 0) v = worst(v, Verdict::Violation);
    }
    return v;
}

AssessmentReport build_report(AssessmentReport parts) {
    const auto fail = [](const std::string& why) { throw Error(ErrorCode::InconsistentInputs, why); };
    if (!(parts.l_old_summary.policy == parts.l_new_summary.policy)) fail("L_old and L_new summaries use different policies");
    if (parts.compliance.size() != parts.limit_curve.entries.size()) {
        fail("compliance has " + std::to_string(parts.compliance.size()) + " records for " +
             std::to_string(parts.limit_curve.entries.size()) + " limit frequencies");
    }
    for (std::size_t i = 0; i < parts.compliance.size(); ++i) {
        if (parts.compliance[i].f_hz != parts.limit_curve.entries[i].f_hz) {
            fail("compliance record " + std::to_string(i) + " is not at its limit frequency");
        }
    }
    if (!std::isfinite(parts.consistency_error) || parts.consistency_error < 0.0) {
        fail("consistency error must be finite and non-negative");
    }
    if (parts.inputs.limit_mode != parts.limit_curve.mode) fail("limit mode differs between inputs and limit curve");
    for (const auto& d : parts.decompositions) {
        if (parts.inputs.grid_points > 0 && (d.f_hz < parts.inputs.f_min_hz || d.f_hz > parts.inputs.f_max_hz)) {
            fail("decomposition at " + detail::format_double(d.f_hz) + " Hz lies outside the analysed span");
        }
    }
    parts.overall_verdict = overall_verdict(parts.l_new_summary, parts.compliance, parts.encirclements);
    return parts;
}

std::string_view to_string(ReportFormat f) noexcept {
    switch (f) {
        case ReportFormat::Json: return "json";
        case ReportFormat::Markdown: return "markdown";
        case ReportFormat::NyquistSvg: return "nyquist_svg";
        case ReportFormat::BodeSvg: return "bode_svg";
    }
    return "json";
}

ReportFormat report_format_from_string(std::string_view text) {
    if (text == "json") return ReportFormat::Json;
    if (text == "markdown" || text == "md") return ReportFormat::Markdown;
    if (text == "nyquist_svg") return ReportFormat::NyquistSvg;
    if (text == "bode_svg") return ReportFormat::BodeSvg;
    throw Error(ErrorCode::UnsupportedFormat, "unsupported report format '" + std::string(text) + "'");
}

std::string_view file_extension(ReportFormat f) noexcept {
    switch (f) {
        case ReportFormat::Json: return "report.json";
        case ReportFormat::Markdown: return "report.md";
        case ReportFormat::NyquistSvg: return "nyquist.svg";
        case ReportFormat::BodeSvg: return "bode.svg";
    }
    return "report.json";
}

// -- JSON ---------------------------------------------------------------------

namespace {

// JSON has no infinity; such values travel as strings.
json number(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

double number_from(const json& j) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        throw Error(ErrorCode::InvalidArgument, "expected a number, got '" + s + "'");
    }
    return j.get<double>();
}

json optional_number(const std::optional<double>& v) { return v ? number(*v) : json(nullptr); }

std::optional<double> optional_number_from(const json& j) {
    if (j.is_null()) return std::nullopt;
    return number_from(j);
}

json policy_json(const MarginPolicy& p) {
    return {{"pm_min_deg", p.pm_min_deg}, {"pm_cau_deg", p.pm_cau_deg}, {"gm_min_db", p.gm_min_db}};
}

MarginPolicy policy_from(const json& j) {
    return {j.at("pm_min_deg").get<double>(), j.at("pm_cau_deg").get<double>(), j.at("gm_min_db").get<double>()};
}

std::string crossover_region(const CrossoverPoint& cp, const MarginPolicy& policy) {
    if (cp.kind == CrossoverKind::Gain) return std::string(to_string(classify_pm(cp.pm_deg.value_or(0.0), policy)));
    return std::abs(cp.l_value) > policy.gm_circle_radius() ? "critical" : "compliant";
}

json crossover_json(const CrossoverPoint& cp, const MarginPolicy& policy) {
    json j;
    j["f_hz"] = cp.f_hz;
    j["kind"] = to_string(cp.kind);
    j["l_re"] = cp.l_value.real();
    j["l_im"] = cp.l_value.imag();
    if (cp.kind == CrossoverKind::Gain) {
        j["pm_deg"] = optional_number(cp.pm_deg);
    } else {
        j["gm_lin"] = optional_number(cp.gm_lin);
        j["gm_db"] = optional_number(cp.gm_db);
    }
    j["region"] = crossover_region(cp, policy);
    return j;
}

CrossoverPoint crossover_from(const json& j) {
    CrossoverPoint cp;
    cp.f_hz = j.at("f_hz").get<double>();
    cp.kind = crossover_kind_from_string(j.at("kind").get<std::string>());
    cp.l_value = Complex(j.at("l_re").get<double>(), j.at("l_im").get<double>());
    if (cp.kind == CrossoverKind::Gain) {
        cp.pm_deg = optional_number_from(j.at("pm_deg"));
    } else {
        cp.gm_lin = optional_number_from(j.at("gm_lin"));
        cp.gm_db = optional_number_from(j.at("gm_db"));
    }
    return cp;
}

json summary_json(const MarginSummary& s) {
    json j;
    j["verdict"] = to_string(s.verdict);
    j["policy"] = policy_json(s.policy);
    json list = json::array();
    for (const auto& cp : s.crossovers) list.push_back(crossover_json(cp, s.policy));
    j["crossovers"] = std::move(list);
    j["worst_pm"] = s.worst_pm ? crossover_json(*s.worst_pm, s.policy) : json(nullptr);
    j["worst_gm"] = s.worst_gm ? crossover_json(*s.worst_gm, s.policy) : json(nullptr);
    return j;
}

MarginSummary summary_from(const json& j) {
    MarginSummary s;
    s.verdict = verdict_from_string(j.at("verdict").get<std::string>());
    s.policy = policy_from(j.at("policy"));
    for (const auto& c : j.at("crossovers")) s.crossovers.push_back(crossover_from(c));
    if (!j.at("worst_pm").is_null()) s.worst_pm = crossover_from(j.at("worst_pm"));
    if (!j.at("worst_gm").is_null()) s.worst_gm = crossover_from(j.at("worst_gm"));
    return s;
}

json decomposition_json(const MarginDecomposition& d) {
    return {{"f_hz", d.f_hz},
            {"kind", to_string(d.kind)},
            {"pm_old_newgc_deg", d.pm_old_newgc_deg},
            {"angle_one_plus_rho_deg", d.angle_one_plus_rho_deg},
            {"pm_new_deg", d.pm_new_deg},
            {"gm_new_lin", number(d.gm_new_lin)},
            {"abs_one_plus_rho", d.abs_one_plus_rho},
            {"l_old_mag", d.l_old_mag}};
}

MarginDecomposition decomposition_from(const json& j) {
    MarginDecomposition d;
    d.f_hz = j.at("f_hz").get<double>();
    d.kind = crossover_kind_from_string(j.at("kind").get<std::string>());
    d.pm_old_newgc_deg = j.at("pm_old_newgc_deg").get<double>();
    d.angle_one_plus_rho_deg = j.at("angle_one_plus_rho_deg").get<double>();
    d.pm_new_deg = j.at("pm_new_deg").get<double>();
    d.gm_new_lin = number_from(j.at("gm_new_lin"));
    d.abs_one_plus_rho = j.at("abs_one_plus_rho").get<double>();
    d.l_old_mag = j.at("l_old_mag").get<double>();
    return d;
}

json flags_json(const LimitFlags& f) {
    json arr = json::array();
    if (f.preexisting_violation) arr.push_back("preexisting_violation");
    if (f.bound_caveat_r_lt_1) arr.push_back("bound_caveat_r_lt_1");
    if (f.unconstrained) arr.push_back("unconstrained");
    return arr;
}

LimitFlags flags_from(const json& j) {
    LimitFlags f;
    for (const auto& name : j) {
        const auto s = name.get<std::string>();
        if (s == "preexisting_violation") f.preexisting_violation = true;
        else if (s == "bound_caveat_r_lt_1") f.bound_caveat_r_lt_1 = true;
        else if (s == "unconstrained") f.unconstrained = true;
        else throw Error(ErrorCode::InvalidArgument, "unknown limit flag '" + s + "'");
    }
    return f;
}

json limit_json(const LimitCurve& c) {
    json entries = json::array();
    for (const auto& e : c.entries) {
        entries.push_back({{"f_hz", e.f_hz},
                           {"pm_old_deg", e.pm_old_deg},
                           {"delta_pm_deg", e.delta_pm_deg},
                           {"z_net_old_mag_ohm", e.z_net_old_mag_ohm},
                           {"z_limit_ohm", optional_number(e.z_limit_ohm)},
                           {"r_diag", optional_number(e.r_diag)},
                           {"flags", flags_json(e.flags)}});
    }
    return {{"mode", to_string(c.mode)}, {"entries", std::move(entries)}};
}

LimitCurve limit_from(const json& j) {
    LimitCurve c;
    c.mode = limit_mode_from_string(j.at("mode").get<std::string>());
    for (const auto& e : j.at("entries")) {
        LimitEntry le;
        le.f_hz = e.at("f_hz").get<double>();
        le.pm_old_deg = e.at("pm_old_deg").get<double>();
        le.delta_pm_deg = e.at("delta_pm_deg").get<double>();
        le.z_net_old_mag_ohm = e.at("z_net_old_mag_ohm").get<double>();
        le.z_limit_ohm = optional_number_from(e.at("z_limit_ohm"));
        le.r_diag = optional_number_from(e.at("r_diag"));
        le.flags = flags_from(e.at("flags"));
        c.entries.push_back(le);
    }
    return c;
}

json compliance_json(const ComplianceRecord& r) {
    return {{"f_hz", r.f_hz},
            {"z_new_mag_ohm", r.z_new_mag_ohm},
            {"z_limit_ohm", optional_number(r.z_limit_ohm)},
            {"verdict", to_string(r.verdict)}};
}

ComplianceRecord compliance_from(const json& j) {
    return {j.at("f_hz").get<double>(), j.at("z_new_mag_ohm").get<double>(), optional_number_from(j.at("z_limit_ohm")),
            verdict_from_string(j.at("verdict").get<std::string>())};
}

json encirclement_json(const EncirclementResult& e) {
    json warnings = json::array();
    for (const auto& w : e.resolution_warnings) {
        warnings.push_back({{"f_lo_hz", number(w.f_lo_hz)}, {"f_hi_hz", number(w.f_hi_hz)}, {"reason", w.reason}});
    }
    return {{"winding", e.winding},
            {"min_distance_to_critical_point", number(e.min_distance_to_critical_point)},
            {"resolution_warnings", std::move(warnings)}};
}

EncirclementResult encirclement_from(const json& j) {
    EncirclementResult e;
    e.winding = j.at("winding").get<int>();
    e.min_distance_to_critical_point = number_from(j.at("min_distance_to_critical_point"));
    for (const auto& w : j.at("resolution_warnings")) {
        e.resolution_warnings.push_back(
            {number_from(w.at("f_lo_hz")), number_from(w.at("f_hi_hz")), w.at("reason").get<std::string>()});
    }
    return e;
}

json inputs_json(const ReportInputs& in) {
    json curves = json::array();
    for (const auto& c : in.curves) {
        curves.push_back({{"role", c.role},
                          {"label", c.meta.label},
                          {"unit", to_string(c.meta.unit)},
                          {"sequence", to_string(c.meta.sequence)},
                          {"operating_point", c.meta.operating_point}});
    }
    json derivations = json::array();
    for (const auto& d : in.derivations) {
        derivations.push_back({{"curve", d.curve}, {"method", to_string(d.method)}, {"inputs", d.inputs}});
    }
    return {{"curves", std::move(curves)},
            {"grid", {{"points", in.grid_points}, {"f_min_hz", in.f_min_hz}, {"f_max_hz", in.f_max_hz}}},
            {"loop_gain_derivations", std::move(derivations)},
            {"limit_mode", to_string(in.limit_mode)},
            {"critical_freqs_hz", in.critical_freqs_hz},
            {"assumptions", in.assumptions}};
}

ReportInputs inputs_from(const json& j) {
    ReportInputs in;
    for (const auto& c : j.at("curves")) {
        CurveMeta meta;
        meta.label = c.at("label").get<std::string>();
        meta.unit = c.at("unit").get<std::string>() == "ohm" ? Unit::Ohm : Unit::Dimensionless;
        meta.sequence = sequence_from_string(c.at("sequence").get<std::string>());
        meta.operating_point = c.at("operating_point").get<std::string>();
        in.curves.push_back({c.at("role").get<std::string>(), std::move(meta)});
    }
    const auto& g = j.at("grid");
    in.grid_points = g.at("points").get<std::size_t>();
    in.f_min_hz = g.at("f_min_hz").get<double>();
    in.f_max_hz = g.at("f_max_hz").get<double>();
    for (const auto& d : j.at("loop_gain_derivations")) {
        in.derivations.push_back({d.at("curve").get<std::string>(),
                                  d.at("method").get<std::string>() == "direct" ? Derivation::Direct
                                                                                 : Derivation::Factored,
                                  d.at("inputs").get<std::vector<std::string>>()});
    }
    in.limit_mode = limit_mode_from_string(j.at("limit_mode").get<std::string>());
    in.critical_freqs_hz = j.at("critical_freqs_hz").get<std::vector<double>>();
    in.assumptions = j.at("assumptions").get<std::vector<std::string>>();
    return in;
}

std::string render_json(const AssessmentReport& r) {
    json j;
    j["schema"] = kReportSchema;
    j["inputs"] = inputs_json(r.inputs);
    j["l_old"] = summary_json(r.l_old_summary);
    j["l_new"] = summary_json(r.l_new_summary);
    json decomps = json::array();
    for (const auto& d : r.decompositions) decomps.push_back(decomposition_json(d));
    j["decompositions"] = std::move(decomps);
    j["limit_curve"] = limit_json(r.limit_curve);
    json comp = json::array();
    for (const auto& c : r.compliance) comp.push_back(compliance_json(c));
    j["compliance"] = std::move(comp);
    json enc = json::object();
    for (const auto& e : r.encirclements) enc[e.curve] = encirclement_json(e.result);
    j["encirclements"] = std::move(enc);
    j["consistency_error"] = r.consistency_error;
    j["overall_verdict"] = to_string(r.overall_verdict);
    return j.dump(2) + "\n";
}

// -- Markdown -----------------------------------------------------------------

std::string fixed2(double v) { return detail::format_fixed(v, 2); }
std::string fixed2(const std::optional<double>& v) { return v ? fixed2(*v) : std::string("n/a"); }

std::string flags_text(const LimitFlags& f) {
    std::string out;
    const auto add = [&](const char* s) { out += (out.empty() ? "" : ", ") + std::string(s); };
    if (f.preexisting_violation) add("preexisting_violation");
    if (f.bound_caveat_r_lt_1) add("bound_caveat_r_lt_1");
    if (f.unconstrained) add("unconstrained");
    return out.empty() ? "-" : out;
}

void crossover_table(std::string& out, const char* title, const MarginSummary& s) {
    out += "## Crossovers of ";
    out += title;
    out += " (verdict: ";
    out += to_string(s.verdict);
    out += ")\n\n";
    if (s.crossovers.empty()) {
        out += "No crossovers.\n\n";
        return;
    }
    out += "| f (Hz) | kind | PM (deg) | GM (dB) | region |\n|---|---|---|---|---|\n";
    for (const auto& cp : s.crossovers) {
        out += "| " + fixed2(cp.f_hz) + " | " + std::string(to_string(cp.kind)) + " | " + fixed2(cp.pm_deg) + " | " +
               fixed2(cp.gm_db) + " | " + crossover_region(cp, s.policy) + " |\n";
    }
    out += '\n';
}

std::string render_markdown(const AssessmentReport& r) {
    const auto& p = r.l_new_summary.policy;
    std::string out = "# Stability margin assessment\n\n";
    out += "Overall verdict: **" + std::string(to_string(r.overall_verdict)) + "**\n\n";
    out += "- Policy: PM_min " + fixed2(p.pm_min_deg) + " deg, PM_cau " + fixed2(p.pm_cau_deg) + " deg, GM_min " +
           fixed2(p.gm_min_db) + " dB\n";
    out += "- Limit frequencies: " + std::string(to_string(r.inputs.limit_mode)) + "\n";
    out += "- Loop-gain consistency error (direct vs factored): " + detail::format_double(r.consistency_error) + "\n";
    for (const auto& a : r.inputs.assumptions) out += "- Assumption: " + a + "\n";
    out += "\n## Inputs\n\n| role | label | unit | sequence | operating point |\n|---|---|---|---|---|\n";
    for (const auto& c : r.inputs.curves) {
        out += "| " + c.role + " | " + c.meta.label + " | " + std::string(to_string(c.meta.unit)) + " | " +
               std::string(to_string(c.meta.sequence)) + " | " + c.meta.operating_point + " |\n";
    }
    out += '\n';
    crossover_table(out, "L_old", r.l_old_summary);
    crossover_table(out, "L_new", r.l_new_summary);

    out += "## Margins of L_new from L_old\n\n";
    if (r.decompositions.empty()) {
        out += "No crossovers to decompose.\n\n";
    } else {
        out += "| f (Hz) | kind | PM_old at f (deg) | angle(1+rho) (deg) | PM_new (deg) | GM_new | abs(1+rho) | "
               "abs(L_old) |\n|---|---|---|---|---|---|---|---|\n";
        for (const auto& d : r.decompositions) {
            out += "| " + fixed2(d.f_hz) + " | " + std::string(to_string(d.kind)) + " | " + fixed2(d.pm_old_newgc_deg) +
                   " | " + fixed2(d.angle_one_plus_rho_deg) + " | " + fixed2(d.pm_new_deg) + " | " +
                   fixed2(d.gm_new_lin) + " | " + fixed2(d.abs_one_plus_rho) + " | " + fixed2(d.l_old_mag) + " |\n";
        }
        out += '\n';
    }

    out += "## Impedance limit\n\n";
    if (r.limit_curve.entries.empty()) {
        out += "No limit frequencies.\n\n";
    } else {
        out += "| f (Hz) | PM_old (deg) | headroom (deg) | abs(Z_net,old) (ohm) | Z_limit (ohm) | abs(1+rho) | flags "
               "|\n|---|---|---|---|---|---|---|\n";
        for (const auto& e : r.limit_curve.entries) {
            out += "| " + fixed2(e.f_hz) + " | " + fixed2(e.pm_old_deg) + " | " + fixed2(e.delta_pm_deg) + " | " +
                   fixed2(e.z_net_old_mag_ohm) + " | " + fixed2(e.z_limit_ohm) + " | " + fixed2(e.r_diag) + " | " +
                   flags_text(e.flags) + " |\n";
        }
        out += '\n';
    }

    out += "## Compliance\n\n";
    out += compliance_markdown(r.compliance);
    out += "\n## Encirclements of -1\n\n| curve | winding (cw) | min distance to -1 | warnings |\n|---|---|---|---|\n";
    for (const auto& e : r.encirclements) {
        out += "| " + e.curve + " | " + std::to_string(e.result.winding) + " | " +
               detail::format_fixed(e.result.min_distance_to_critical_point, 4) + " | " +
               std::to_string(e.result.resolution_warnings.size()) + " |\n";
    }
    return out;
}

}  // namespace

std::string compliance_markdown(std::span<const ComplianceRecord> records) {
    if (records.empty()) return "No compliance records.\n";
    std::string out = "| f (Hz) | abs(Z_new) (ohm) | Z_limit (ohm) | verdict |\n|---|---|---|---|\n";
    for (const auto& r : records) {
        out += "| " + fixed2(r.f_hz) + " | " + fixed2(r.z_new_mag_ohm) + " | " + fixed2(r.z_limit_ohm) + " | " +
               std::string(to_string(r.verdict)) + " |\n";
    }
    return out;
}

std::string render(const AssessmentReport& report, ReportFormat format) {
    switch (format) {
        case ReportFormat::Json: return render_json(report);
        case ReportFormat::Markdown: return render_markdown(report);
        case ReportFormat::NyquistSvg: return detail::render_nyquist_svg(report);
        case ReportFormat::BodeSvg: return detail::render_bode_svg(report);
    }
    throw Error(ErrorCode::UnsupportedFormat, "unsupported report format");
}

AssessmentReport report_from_json(std::string_view text) {
    try {
        const json j = json::parse(text);
        if (j.at("schema").get<std::string>() != kReportSchema) {
            throw Error(ErrorCode::UnsupportedFormat, "report schema '" + j.at("schema").get<std::string>() +
                                                          "' is not " + std::string(kReportSchema));
        }
        AssessmentReport r;
        r.inputs = inputs_from(j.at("inputs"));
        r.l_old_summary = summary_from(j.at("l_old"));
        r.l_new_summary = summary_from(j.at("l_new"));
        for (const auto& d : j.at("decompositions")) r.decompositions.push_back(decomposition_from(d));
        r.limit_curve = limit_from(j.at("limit_curve"));
        for (const auto& c : j.at("compliance")) r.compliance.push_back(compliance_from(c));
        for (const auto& [name, e] : j.at("encirclements").items()) {
            r.encirclements.push_back({name, encirclement_from(e)});
        }
        r.consistency_error = j.at("consistency_error").get<double>();
        r.overall_verdict = verdict_from_string(j.at("overall_verdict").get<std::string>());
        return r;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, std::string("malformed report JSON: ") + e.what());
    }
}

}  // namespace margin_gate
