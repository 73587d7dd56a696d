#include "margin_gate/margins.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "margin_gate/angles.hpp"
#include "margin_gate/error.hpp"
#include "margin_gate/loopgain.hpp"
#include "text_util.hpp"

namespace margin_gate {

std::string_view to_string(CrossoverKind kind) noexcept {
    return kind == CrossoverKind::Gain ? "gain" : "phase";
}

CrossoverKind crossover_kind_from_string(std::string_view text) {
    if (text == "gain") return CrossoverKind::Gain;
    if (text == "phase") return CrossoverKind::Phase;
    throw Error(ErrorCode::InvalidArgument, "unknown crossover kind '" + std::string(text) + "'");
}

namespace {

constexpr double kMergeRelTol = 1e-6;
constexpr int kMaxBisections = 200;

Margin compute_margin(CrossoverKind kind, Complex l_value) {
    Margin m;
    if (kind == CrossoverKind::Gain) {
        m.pm_deg = normalize_deg(180.0 + arg_deg(l_value));
    } else {
        m.gm_lin = 1.0 / std::abs(l_value);
        m.gm_db = 20.0 * std::log10(*m.gm_lin);
    }
    return m;
}

CrossoverPoint make_point(const FrequencyResponse& l, CrossoverKind kind, double f_hz) {
    CrossoverPoint cp;
    cp.kind = kind;
    cp.f_hz = f_hz;
    cp.l_value = value_at(l, f_hz);
    const Margin m = compute_margin(kind, cp.l_value);
    cp.pm_deg = m.pm_deg;
    cp.gm_lin = m.gm_lin;
    cp.gm_db = m.gm_db;
    return cp;
}

/// Bisection on log-frequency for a sign change of `h` inside [f_lo, f_hi].
template <typename Fn>
double bisect_log(double f_lo, double f_hi, double h_lo, Fn&& h) {
    double a = std::log(f_lo);
    double b = std::log(f_hi);
    for (int iter = 0; iter < kMaxBisections && b - a > 1e-15 * std::max(1.0, std::abs(a)); ++iter) {
        const double m = 0.5 * (a + b);
        const double f = std::clamp(std::exp(m), f_lo, f_hi);
        const double hm = h(f);
        if (hm == 0.0) return f;
        if ((hm < 0.0) == (h_lo < 0.0)) {
            a = m;
            h_lo = hm;
        } else {
            b = m;
        }
    }
    return std::clamp(std::exp(0.5 * (a + b)), f_lo, f_hi);
}

void require_nonzero(const FrequencyResponse& l) {
    for (std::size_t i = 0; i < l.size(); ++i) {
        if (l[i] == Complex(0.0, 0.0)) {
            throw Error(ErrorCode::ZeroMagnitudeSample,
                        "loop gain vanishes at " + detail::format_double(l.grid()[i]) + " Hz");
        }
    }
}

std::vector<double> gain_crossing_freqs(const FrequencyResponse& l) {
    const auto& grid = l.grid();
    std::vector<double> g(l.size());
    for (std::size_t i = 0; i < l.size(); ++i) g[i] = std::log(std::abs(l[i]));

    std::vector<double> out;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (g[i] == 0.0) {
            out.push_back(grid[i]);
            continue;
        }
        if (i + 1 < g.size() && g[i + 1] != 0.0 && (g[i] < 0.0) != (g[i + 1] < 0.0)) {
            out.push_back(bisect_log(grid[i], grid[i + 1], g[i],
                                     [&](double f) { return std::log(std::abs(value_at(l, f))); }));
        }
    }
    return out;
}

bool on_level(double u) { return std::fmod(u + 180.0, 360.0) == 0.0; }

std::vector<double> phase_crossing_freqs(const FrequencyResponse& l) {
    const auto& grid = l.grid();
    const PhaseSeries phase = unwrap_phase(l);
    const auto& u = phase.degrees;

    std::vector<double> out;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (on_level(u[i])) {
            out.push_back(grid[i]);
            continue;
        }
        if (i + 1 >= u.size() || on_level(u[i + 1])) continue;
        const double lo = std::min(u[i], u[i + 1]);
        const double hi = std::max(u[i], u[i + 1]);
        const double level = -180.0 + 360.0 * std::floor((hi + 180.0) / 360.0);
        if (!(level > lo && level < hi)) continue;

        const double log_lo = std::log(grid[i]);
        const double span = std::log(grid[i + 1]) - log_lo;
        const double step = u[i + 1] - u[i];
        const auto interp = [&](double f) { return u[i] + step * (std::log(f) - log_lo) / span - level; };
        out.push_back(bisect_log(grid[i], grid[i + 1], u[i] - level, interp));
    }
    return out;
}

}  // namespace

Margin margin_at(CrossoverKind kind, Complex l_value) {
    if (kind == CrossoverKind::Gain) {
        if (std::abs(std::abs(l_value) - 1.0) >= 1e-6) {
            throw Error(ErrorCode::KindMismatch, "gain-crossover value has |L| = " +
                                                     detail::format_double(std::abs(l_value)) + ", not 1");
        }
    } else {
        if (l_value == Complex(0.0, 0.0) || std::abs(normalize_deg(arg_deg(l_value) + 180.0)) >= 1e-6) {
            throw Error(ErrorCode::KindMismatch, "phase-crossover value is not on the negative real axis");
        }
    }
    return compute_margin(kind, l_value);
}

std::vector<CrossoverPoint> find_crossovers(const FrequencyResponse& l, CrossoverKind kind) {
    require_nonzero(l);
    std::vector<double> freqs = kind == CrossoverKind::Gain ? gain_crossing_freqs(l) : phase_crossing_freqs(l);
    std::sort(freqs.begin(), freqs.end());

    std::vector<CrossoverPoint> out;
    for (double f : freqs) {
        if (!out.empty() && (f - out.back().f_hz) / out.back().f_hz < kMergeRelTol) continue;
        out.push_back(make_point(l, kind, f));
    }
    return out;
}

MarginDecomposition decompose_margins(const FrequencyResponse& l_old, const FrequencyResponse& rho_curve,
                                      double f_hz, CrossoverKind kind) {
    const Complex lo = value_at(l_old, f_hz);
    const Complex opr = value_at(one_plus(rho_curve), f_hz);
    if (std::abs(opr) < 1e-12) {
        throw Error(ErrorCode::SingularSensitivity, "|1+rho| vanishes at " + detail::format_double(f_hz) + " Hz");
    }
    if (lo == Complex(0.0, 0.0)) {
        throw Error(ErrorCode::ZeroMagnitudeSample, "L_old vanishes at " + detail::format_double(f_hz) + " Hz");
    }
    MarginDecomposition d;
    d.kind = kind;
    d.f_hz = f_hz;
    d.pm_old_newgc_deg = normalize_deg(180.0 + arg_deg(lo));
    d.angle_one_plus_rho_deg = arg_deg(opr);
    d.pm_new_deg = normalize_deg(d.pm_old_newgc_deg - d.angle_one_plus_rho_deg);
    d.abs_one_plus_rho = std::abs(opr);
    d.l_old_mag = std::abs(lo);
    d.gm_new_lin = d.abs_one_plus_rho / d.l_old_mag;
    return d;
}

Verdict margin_verdict(const std::vector<CrossoverPoint>& crossovers, const MarginPolicy& policy) {
    std::optional<double> worst_pm;
    bool gm_violation = false;
    for (const auto& cp : crossovers) {
        if (cp.kind == CrossoverKind::Gain && cp.pm_deg) {
            worst_pm = worst_pm ? std::min(*worst_pm, *cp.pm_deg) : *cp.pm_deg;
        }
        if (cp.kind == CrossoverKind::Phase && cp.gm_db && *cp.gm_db < policy.gm_min_db) gm_violation = true;
    }
    if (gm_violation || (worst_pm && *worst_pm < policy.pm_min_deg)) return Verdict::Violation;
    if (worst_pm && *worst_pm < policy.pm_cau_deg) return Verdict::Caution;
    return Verdict::Compliant;
}

MarginSummary summarize_margins(const FrequencyResponse& l, const MarginPolicy& policy) {
    policy.validate();
    MarginSummary s;
    s.policy = policy;
    auto gain = find_crossovers(l, CrossoverKind::Gain);
    auto phase = find_crossovers(l, CrossoverKind::Phase);

    for (const auto& cp : gain) {
        if (!s.worst_pm || *cp.pm_deg < *s.worst_pm->pm_deg) s.worst_pm = cp;
    }
    for (const auto& cp : phase) {
        if (!s.worst_gm || std::abs(cp.l_value) > std::abs(s.worst_gm->l_value)) s.worst_gm = cp;
    }
    s.crossovers.reserve(gain.size() + phase.size());
    std::merge(gain.begin(), gain.end(), phase.begin(), phase.end(), std::back_inserter(s.crossovers),
               [](const CrossoverPoint& a, const CrossoverPoint& b) { return a.f_hz < b.f_hz; });
    s.verdict = margin_verdict(s.crossovers, policy);
    return s;
}

}  // namespace margin_gate
