#pragma once

// Seeded random inputs for property tests.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "margin_gate/freqresp.hpp"
#include "margin_gate/policy.hpp"

namespace gen {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
    double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
    bool coin() { return integer(0, 1) == 1; }

    std::complex<double> nonzero_complex(double mag_lo = 1e-3, double mag_hi = 1e3) {
        return std::polar(log_uniform(mag_lo, mag_hi), uniform(-std::numbers::pi, std::numbers::pi));
    }

    /// Strictly increasing positive grid with irregular spacing.
    margin_gate::FrequencyGrid grid(std::size_t n, double f_lo = 1.0, double f_hi = 1e4) {
        std::vector<double> cumulative(n, 0.0);
        for (std::size_t i = 1; i < n; ++i) cumulative[i] = cumulative[i - 1] + uniform(0.2, 1.0);
        const double span = std::log(f_hi / f_lo);
        std::vector<double> pts(n);
        for (std::size_t i = 0; i < n; ++i) pts[i] = f_lo * std::exp(span * cumulative[i] / cumulative.back());
        pts.back() = f_hi;
        return margin_gate::FrequencyGrid(std::move(pts));
    }

    margin_gate::FrequencyResponse response(const margin_gate::FrequencyGrid& g,
                                            margin_gate::Unit unit = margin_gate::Unit::Ohm) {
        std::vector<std::complex<double>> v(g.size());
        for (auto& z : v) z = nonzero_complex();
        margin_gate::CurveMeta meta;
        meta.unit = unit;
        const int s = integer(0, 2);
        meta.sequence = s == 0   ? margin_gate::Sequence::Positive
                        : s == 1 ? margin_gate::Sequence::Negative
                                 : margin_gate::Sequence::Untagged;
        meta.label = "curve " + std::to_string(integer(0, 999));
        meta.operating_point = coin() ? "P=1 pu, Q=0 pu" : "";
        return margin_gate::FrequencyResponse(g, std::move(v), meta);
    }

    margin_gate::MarginPolicy policy() {
        margin_gate::MarginPolicy p;
        p.pm_min_deg = uniform(1.0, 60.0);
        p.pm_cau_deg = uniform(p.pm_min_deg, 90.0);
        p.gm_min_db = uniform(0.0, 30.0);
        return p;
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

}  // namespace gen
