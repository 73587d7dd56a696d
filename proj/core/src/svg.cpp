#include "svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "margin_gate/angles.hpp"
#include "margin_gate/report.hpp"
#include "text_util.hpp"

namespace margin_gate::detail {

namespace {

constexpr std::array<const char*, 4> kPalette = {"#1f5fbf", "#d9480f", "#2b8a3e", "#862e9c"};

std::string num(double v, int decimals = 4) { return format_fixed(v, decimals); }

std::string escape_xml(std::string_view text) {
    std::string out;
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

Complex on_circle(double radius, double deg) { return polar_deg(radius, deg); }

// Sector of the disc of `radius` between two polar angles, counter-clockwise
// from `from_deg` to `to_deg`.
std::string sector(double radius, double from_deg, double to_deg) {
    const Complex a = on_circle(radius, from_deg);
    const Complex b = on_circle(radius, to_deg);
    const int large = (to_deg - from_deg) > 180.0 ? 1 : 0;
    return "M 0 0 L " + num(a.real()) + " " + num(a.imag()) + " A " + num(radius) + " " + num(radius) + " 0 " +
           std::to_string(large) + " 1 " + num(b.real()) + " " + num(b.imag()) + " Z";
}

Complex clamp_to_view(Complex z, double limit) {
    const double m = std::abs(z);
    return m > limit ? z * (limit / m) : z;
}

const std::vector<CrossoverPoint>* crossovers_for(const AssessmentReport& r, const std::string& name) {
    if (name == "L_old") return &r.l_old_summary.crossovers;
    if (name == "L_new") return &r.l_new_summary.crossovers;
    return nullptr;
}

}  // namespace

std::string render_nyquist_svg(const AssessmentReport& report) {
    const MarginPolicy& policy = report.l_new_summary.policy;
    constexpr double kSize = 640.0;
    constexpr double kExtent = 2.0;
    constexpr double kScale = 0.5 * (kSize - 40.0) / kExtent;
    const double wedge_radius = 1.5 * kExtent;

    std::string s;
    s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kSize, 0) + "\" height=\"" + num(kSize + 60, 0) +
         "\" viewBox=\"0 0 " + num(kSize, 0) + " " + num(kSize + 60, 0) + "\">\n";
    s += "<title>Nyquist diagram with critical and caution regions</title>\n";
    s += "<rect x=\"0\" y=\"0\" width=\"" + num(kSize, 0) + "\" height=\"" + num(kSize + 60, 0) +
         "\" style=\"fill:#ffffff;stroke:none\"/>\n";
    s += "<defs><clipPath id=\"plot-area\"><rect x=\"" + num(-kExtent) + "\" y=\"" + num(-kExtent) + "\" width=\"" +
         num(2 * kExtent) + "\" height=\"" + num(2 * kExtent) + "\"/></clipPath></defs>\n";
    s += "<g transform=\"translate(" + num(kSize / 2, 1) + "," + num(kSize / 2, 1) + ") scale(" + num(kScale) + "," +
         num(-kScale) + ")\" clip-path=\"url(#plot-area)\">\n";

    // wedges about the negative real axis
    s += "<path class=\"wedge critical\" d=\"" + sector(wedge_radius, 180.0 - policy.pm_min_deg, 180.0 + policy.pm_min_deg) +
         "\" style=\"fill:#e03131;fill-opacity:0.30;stroke:none\"/>\n";
    s += "<path class=\"wedge caution\" d=\"" +
         sector(wedge_radius, 180.0 + policy.pm_min_deg, 180.0 + policy.pm_cau_deg) + " " +
         sector(wedge_radius, 180.0 - policy.pm_cau_deg, 180.0 - policy.pm_min_deg) +
         "\" style=\"fill:#f59f00;fill-opacity:0.30;stroke:none\"/>\n";

    const std::string thin = "vector-effect:non-scaling-stroke;stroke-width:1";
    s += "<line class=\"axis\" x1=\"" + num(-kExtent) + "\" y1=\"0\" x2=\"" + num(kExtent) +
         "\" y2=\"0\" style=\"stroke:#868e96;" + thin + "\"/>\n";
    s += "<line class=\"axis\" x1=\"0\" y1=\"" + num(-kExtent) + "\" x2=\"0\" y2=\"" + num(kExtent) +
         "\" style=\"stroke:#868e96;" + thin + "\"/>\n";
    s += "<circle class=\"unit-circle\" cx=\"0\" cy=\"0\" r=\"1\" style=\"fill:none;stroke:#495057;" + thin +
         ";stroke-dasharray:4 3\"/>\n";
    s += "<circle class=\"gm-circle\" cx=\"0\" cy=\"0\" r=\"" + num(policy.gm_circle_radius(), 6) +
         "\" style=\"fill:none;stroke:#c92a2a;" + thin + "\"/>\n";
    s += "<path class=\"critical-point\" d=\"M -1.04 0 L -0.96 0 M -1 -0.04 L -1 0.04\" style=\"stroke:#000000;" +
         thin + "\"/>\n";

    for (std::size_t k = 0; k < report.loci.size(); ++k) {
        const auto& locus = report.loci[k];
        const char* color = kPalette[k % kPalette.size()];
        std::string d;
        for (std::size_t i = 0; i < locus.curve.size(); ++i) {
            const Complex z = clamp_to_view(locus.curve[i], 50.0 * kExtent);
            d += (i == 0 ? "M " : " L ") + num(z.real(), 5) + " " + num(z.imag(), 5);
        }
        s += "<path class=\"locus\" data-curve=\"" + escape_xml(locus.name) + "\" d=\"" + d +
             "\" style=\"fill:none;stroke:" + color + ";stroke-width:1.5;vector-effect:non-scaling-stroke\"/>\n";
        if (const auto* cps = crossovers_for(report, locus.name)) {
            for (const auto& cp : *cps) {
                const Complex z = clamp_to_view(cp.l_value, 50.0 * kExtent);
                s += "<circle class=\"marker\" data-kind=\"" + std::string(to_string(cp.kind)) + "\" cx=\"" +
                     num(z.real(), 5) + "\" cy=\"" + num(z.imag(), 5) + "\" r=\"0.03\" style=\"fill:" + color +
                     ";stroke:none\"/>\n";
            }
        }
    }
    s += "</g>\n";

    double y = kSize + 18.0;
    s += "<text x=\"12\" y=\"" + num(y, 1) + "\" style=\"font:12px sans-serif;fill:#212529\">critical: PM &lt; " +
         num(policy.pm_min_deg, 1) + " deg; caution: PM &lt; " + num(policy.pm_cau_deg, 1) +
         " deg; GM circle radius " + num(policy.gm_circle_radius(), 6) + " (" + num(policy.gm_min_db, 1) +
         " dB)</text>\n";
    for (std::size_t k = 0; k < report.loci.size(); ++k) {
        y += 16.0;
        s += "<text x=\"12\" y=\"" + num(y, 1) + "\" style=\"font:12px sans-serif;fill:" +
             kPalette[k % kPalette.size()] + "\">" + escape_xml(report.loci[k].name) + "</text>\n";
    }
    s += "</svg>\n";
    return s;
}

std::string render_bode_svg(const AssessmentReport& report) {
    constexpr double kWidth = 800.0;
    constexpr double kPanel = 260.0;
    constexpr double kLeft = 70.0;
    constexpr double kRight = 20.0;
    constexpr double kTop = 30.0;
    constexpr double kGap = 50.0;
    const double plot_w = kWidth - kLeft - kRight;
    const double height = kTop + 2 * kPanel + kGap + 60.0;

    double f_lo = report.inputs.f_min_hz;
    double f_hi = report.inputs.f_max_hz;
    if (!report.loci.empty()) {
        f_lo = report.loci.front().curve.grid().front();
        f_hi = report.loci.front().curve.grid().back();
    }
    if (!(f_lo > 0.0) || !(f_hi > f_lo)) {
        f_lo = 1.0;
        f_hi = 10.0;
    }

    struct Trace {
        std::string name;
        std::vector<double> f;
        std::vector<double> mag_db;
        std::vector<double> phase_deg;
    };
    std::vector<Trace> traces;
    double db_lo = -20.0, db_hi = 20.0, ph_lo = -270.0, ph_hi = 90.0;
    bool first_db = true, first_ph = true;
    for (const auto& locus : report.loci) {
        Trace t{locus.name, {}, {}, {}};
        const auto pts = locus.curve.grid().points();
        t.f.assign(pts.begin(), pts.end());
        for (std::size_t i = 0; i < locus.curve.size(); ++i) {
            t.mag_db.push_back(20.0 * std::log10(std::max(std::abs(locus.curve[i]), 1e-300)));
        }
        try {
            t.phase_deg = unwrap_phase(locus.curve).degrees;
        } catch (const std::exception&) {
            t.phase_deg.clear();
        }
        for (double v : t.mag_db) {
            db_lo = first_db ? v : std::min(db_lo, v);
            db_hi = first_db ? v : std::max(db_hi, v);
            first_db = false;
        }
        for (double v : t.phase_deg) {
            ph_lo = first_ph ? v : std::min(ph_lo, v);
            ph_hi = first_ph ? v : std::max(ph_hi, v);
            first_ph = false;
        }
        traces.push_back(std::move(t));
    }
    db_lo = std::min(db_lo, -3.0);
    db_hi = std::max(db_hi, 3.0);
    ph_lo = std::min(ph_lo, -180.0) - 10.0;
    ph_hi = std::max(ph_hi, -180.0) + 10.0;

    const auto x_of = [&](double f) { return kLeft + plot_w * std::log(f / f_lo) / std::log(f_hi / f_lo); };
    const auto y_panel = [&](double v, double lo, double hi, double top) { return top + kPanel * (hi - v) / (hi - lo); };
    const double mag_top = kTop;
    const double ph_top = kTop + kPanel + kGap;

    std::string s;
    s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth, 0) + "\" height=\"" + num(height, 0) +
         "\" viewBox=\"0 0 " + num(kWidth, 0) + " " + num(height, 0) + "\">\n";
    s += "<title>Bode diagram of loop gains</title>\n";
    s += "<rect x=\"0\" y=\"0\" width=\"" + num(kWidth, 0) + "\" height=\"" + num(height, 0) +
         "\" style=\"fill:#ffffff;stroke:none\"/>\n";

    const auto frame = [&](double top, const std::string& label, double ref, double lo, double hi) {
        s += "<rect class=\"panel\" x=\"" + num(kLeft, 1) + "\" y=\"" + num(top, 1) + "\" width=\"" + num(plot_w, 1) +
             "\" height=\"" + num(kPanel, 1) + "\" style=\"fill:none;stroke:#495057;stroke-width:1\"/>\n";
        const double yr = y_panel(ref, lo, hi, top);
        s += "<line class=\"reference\" x1=\"" + num(kLeft, 1) + "\" y1=\"" + num(yr, 2) + "\" x2=\"" +
             num(kLeft + plot_w, 1) + "\" y2=\"" + num(yr, 2) +
             "\" style=\"stroke:#c92a2a;stroke-width:1;stroke-dasharray:4 3\"/>\n";
        s += "<text x=\"8\" y=\"" + num(top + 14, 1) + "\" style=\"font:12px sans-serif;fill:#212529\">" + label +
             "</text>\n";
        s += "<text x=\"8\" y=\"" + num(top + kPanel, 1) + "\" style=\"font:10px sans-serif;fill:#495057\">" +
             num(lo, 1) + "</text>\n";
        s += "<text x=\"8\" y=\"" + num(top + 28, 1) + "\" style=\"font:10px sans-serif;fill:#495057\">" + num(hi, 1) +
             "</text>\n";
    };
    frame(mag_top, "|L| (dB)", 0.0, db_lo, db_hi);
    frame(ph_top, "angle L (deg)", -180.0, ph_lo, ph_hi);

    for (double decade = std::ceil(std::log10(f_lo)); decade <= std::log10(f_hi); decade += 1.0) {
        const double x = x_of(std::pow(10.0, decade));
        s += "<text x=\"" + num(x - 10, 1) + "\" y=\"" + num(ph_top + kPanel + 16, 1) +
             "\" style=\"font:10px sans-serif;fill:#495057\">1e" + num(decade, 0) + "</text>\n";
    }
    s += "<text x=\"" + num(kLeft + plot_w / 2 - 40, 1) + "\" y=\"" + num(ph_top + kPanel + 34, 1) +
         "\" style=\"font:12px sans-serif;fill:#212529\">frequency (Hz)</text>\n";

    for (std::size_t k = 0; k < traces.size(); ++k) {
        const auto& t = traces[k];
        const char* color = kPalette[k % kPalette.size()];
        std::string d;
        for (std::size_t i = 0; i < t.f.size(); ++i) {
            d += (i == 0 ? "M " : " L ") + num(x_of(t.f[i]), 2) + " " + num(y_panel(t.mag_db[i], db_lo, db_hi, mag_top), 2);
        }
        s += "<path class=\"magnitude\" data-curve=\"" + escape_xml(t.name) + "\" d=\"" + d +
             "\" style=\"fill:none;stroke:" + color + ";stroke-width:1.5\"/>\n";
        if (!t.phase_deg.empty()) {
            d.clear();
            for (std::size_t i = 0; i < t.f.size(); ++i) {
                d += (i == 0 ? "M " : " L ") + num(x_of(t.f[i]), 2) + " " +
                     num(y_panel(t.phase_deg[i], ph_lo, ph_hi, ph_top), 2);
            }
            s += "<path class=\"phase\" data-curve=\"" + escape_xml(t.name) + "\" d=\"" + d +
                 "\" style=\"fill:none;stroke:" + color + ";stroke-width:1.5\"/>\n";
        }
        if (const auto* cps = crossovers_for(report, t.name)) {
            for (const auto& cp : *cps) {
                if (cp.f_hz < f_lo || cp.f_hz > f_hi) continue;
                const double x = x_of(cp.f_hz);
                s += "<line class=\"marker\" data-kind=\"" + std::string(to_string(cp.kind)) + "\" x1=\"" + num(x, 2) +
                     "\" y1=\"" + num(mag_top, 1) + "\" x2=\"" + num(x, 2) + "\" y2=\"" + num(ph_top + kPanel, 1) +
                     "\" style=\"stroke:" + color + ";stroke-width:1;stroke-dasharray:2 3\"/>\n";
            }
        }
        s += "<text x=\"" + num(kLeft + 10 + 120 * static_cast<double>(k), 1) + "\" y=\"" + num(kTop - 10, 1) +
             "\" style=\"font:12px sans-serif;fill:" + color + "\">" + escape_xml(t.name) + "</text>\n";
    }
    s += "</svg>\n";
    return s;
}

}  // namespace margin_gate::detail
