#pragma once

// Closed-form references used to check the library. Nothing here calls into
// margin_gate beyond building curves from sampled values.

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <optional>
#include <vector>

#include "margin_gate/freqresp.hpp"

namespace oracle {

using cplx = std::complex<double>;
using Transfer = std::function<cplx(double f_hz)>;

inline constexpr double kPi = std::numbers::pi;

/// gain / (1 + s/(2 pi fc))^order at s = j 2 pi f.
inline Transfer lowpass(double gain, double fc_hz, int order) {
    return [=](double f) {
        const cplx one_plus = 1.0 + cplx(0.0, f / fc_hz);
        return gain / std::pow(one_plus, order);
    };
}

inline margin_gate::FrequencyResponse sample(const Transfer& h, const margin_gate::FrequencyGrid& grid,
                                             margin_gate::Unit unit = margin_gate::Unit::Dimensionless) {
    std::vector<cplx> v;
    v.reserve(grid.size());
    for (double f : grid.points()) v.push_back(h(f));
    margin_gate::CurveMeta meta;
    meta.unit = unit;
    return margin_gate::FrequencyResponse(grid, std::move(v), meta);
}

/// Number of sign changes in the first column of the Routh array of the
/// polynomial with coefficients `c` (highest power first). Assumes no zero
/// pivots, which holds for the fixtures used here.
inline int routh_rhp_roots(std::vector<double> c) {
    const std::size_t n = c.size();
    std::vector<std::vector<double>> rows;
    std::vector<double> r0, r1;
    for (std::size_t i = 0; i < n; i += 2) r0.push_back(c[i]);
    for (std::size_t i = 1; i < n; i += 2) r1.push_back(c[i]);
    r1.resize(r0.size(), 0.0);
    rows.push_back(r0);
    rows.push_back(r1);
    while (rows.size() < n) {
        const auto& a = rows[rows.size() - 2];
        const auto& b = rows[rows.size() - 1];
        std::vector<double> next(a.size(), 0.0);
        for (std::size_t j = 0; j + 1 < a.size(); ++j) {
            next[j] = (b[0] * a[j + 1] - a[0] * b[j + 1]) / b[0];
        }
        rows.push_back(next);
    }
    int changes = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if ((rows[i][0] > 0) != (rows[i - 1][0] > 0)) ++changes;
    }
    return changes;
}

/// Closed-loop characteristic polynomial of K / (1 + s')^3 in s' = s/wc:
/// s'^3 + 3 s'^2 + 3 s' + (1 + K).
inline std::vector<double> three_pole_characteristic(double gain) { return {1.0, 3.0, 3.0, 1.0 + gain}; }

/// Frequencies where g(f) changes sign on a dense log sweep, each refined by
/// bisection in f to machine precision.
inline std::vector<double> sign_changes(const std::function<double(double)>& g, double f_min, double f_max,
                                        std::size_t n) {
    std::vector<double> roots;
    const double ratio = std::pow(f_max / f_min, 1.0 / static_cast<double>(n - 1));
    double fa = f_min;
    double ga = g(fa);
    for (std::size_t i = 1; i < n; ++i) {
        const double fb = (i + 1 == n) ? f_max : f_min * std::pow(ratio, static_cast<double>(i));
        const double gb = g(fb);
        if (ga == 0.0) roots.push_back(fa);
        if ((ga < 0.0 && gb > 0.0) || (ga > 0.0 && gb < 0.0)) {
            double lo = fa, hi = fb, glo = ga;
            for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double gm = g(mid);
                if ((gm < 0.0) == (glo < 0.0)) {
                    lo = mid;
                    glo = gm;
                } else {
                    hi = mid;
                }
            }
            roots.push_back(0.5 * (lo + hi));
        }
        fa = fb;
        ga = gb;
    }
    return roots;
}

/// Gain crossovers of an analytic transfer function, from a dense sweep.
inline std::vector<double> dense_gain_crossovers(const Transfer& h, double f_min, double f_max,
                                                 std::size_t n = 200000) {
    return sign_changes([&](double f) { return std::log(std::abs(h(f))); }, f_min, f_max, n);
}

/// 180 + principal angle of h(f), in (-180, 180].
inline double pm_deg(const Transfer& h, double f) {
    double pm = 180.0 + std::arg(h(f)) * 180.0 / kPi;
    if (pm > 180.0) pm -= 360.0;
    if (pm <= -180.0) pm += 360.0;
    return pm;
}

/// |e^{j theta} - 1| computed from components.
inline double chord(double theta_deg) {
    const double t = theta_deg * kPi / 180.0;
    return std::hypot(std::cos(t) - 1.0, std::sin(t));
}

/// Maximum allowable impedance written out from its definition.
inline std::optional<double> z_limit(double z_net_mag, double pm_old_deg, double pm_min_deg) {
    const double d = pm_old_deg - pm_min_deg;
    if (d <= 0.0) return std::nullopt;
    const double half = std::min(d, 180.0) * 0.5 * kPi / 180.0;
    return z_net_mag / (2.0 * std::sin(half));
}

}  // namespace oracle
