#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "margin_gate/error.hpp"
#include "margin_gate/regions.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"
#include "support/testing.hpp"

using namespace margin_gate;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

Complex at_deg(double mag, double deg) { return std::polar(mag, deg * kDeg); }

const MarginPolicy kDefault{15.0, 30.0, 15.0};

CrossoverPoint phase_point(double mag) {
    CrossoverPoint c;
    c.kind = CrossoverKind::Phase;
    c.l_value = Complex(-mag, 0.0);
    c.gm_lin = 1.0 / mag;
    c.gm_db = -20.0 * std::log10(mag);
    return c;
}

/// Magnitude falling from 2 to 0.5 across the grid at a fixed angle.
FrequencyResponse falling_at(double deg, const FrequencyGrid& g) {
    std::vector<Complex> v;
    const double span = std::log(g.back() / g.front());
    for (double f : g.points()) v.push_back(at_deg(2.0 * std::pow(0.25, std::log(f / g.front()) / span), deg));
    CurveMeta meta;
    meta.unit = Unit::Dimensionless;
    return FrequencyResponse(g, std::move(v), meta);
}

}  // namespace

TEST_SUITE("regions") {

TEST_CASE("classify_crossing spot values") {
    CHECK(classify_crossing(at_deg(1.0, -170.0), kDefault) == Region::Critical);
    CHECK(classify_crossing(at_deg(1.0, -160.0), kDefault) == Region::Caution);
    CHECK(classify_crossing(at_deg(1.0, -140.0), kDefault) == Region::Compliant);
    CHECK_ERROR_CODE(classify_crossing(at_deg(1.1, -140.0), kDefault), ErrorCode::NotOnUnitCircle);
    CHECK_NOTHROW(classify_crossing(at_deg(1.0 + 5e-7, -140.0), kDefault));
}

TEST_CASE("classify_pm boundaries") {
    CHECK(classify_pm(14.999, kDefault) == Region::Critical);
    CHECK(classify_pm(15.0, kDefault) == Region::Caution);
    CHECK(classify_pm(29.999, kDefault) == Region::Caution);
    CHECK(classify_pm(30.0, kDefault) == Region::Compliant);
    CHECK(classify_pm(-30.0, kDefault) == Region::Critical);
}

TEST_CASE("property: classification agrees with the thresholds") {
    gen::Rng rng(6001);
    for (int trial = 0; trial < 2000; ++trial) {
        const MarginPolicy p = rng.policy();
        const double pm = rng.uniform(-179.0, 180.0);
        const Region r = classify_crossing(at_deg(1.0, pm - 180.0), p);
        // recompute the margin the same way a reader of the plot would
        const double pm_read = 180.0 + std::arg(at_deg(1.0, pm - 180.0)) / kDeg;
        const double pm_norm = pm_read > 180.0 ? pm_read - 360.0 : pm_read;
        const Region expected = pm_norm < p.pm_min_deg   ? Region::Critical
                                : pm_norm < p.pm_cau_deg ? Region::Caution
                                                         : Region::Compliant;
        CHECK(r == expected);
    }
}

TEST_CASE("gm circle") {
    CHECK(std::abs(kDefault.gm_circle_radius() - std::pow(10.0, -0.75)) < 1e-12);
    CHECK(kDefault.gm_circle_radius() == doctest::Approx(0.177828).epsilon(1e-6));
    const std::vector<CrossoverPoint> pts{phase_point(0.4), phase_point(0.1)};
    const auto checks = gm_circle_check(pts, kDefault);
    REQUIRE(checks.size() == 2);
    CHECK(checks[0].violated);
    CHECK_FALSE(checks[1].violated);
    CHECK(gm_circle_check({}, kDefault).empty());

    CrossoverPoint gain;
    gain.kind = CrossoverKind::Gain;
    gain.l_value = at_deg(1.0, -120.0);
    gain.pm_deg = 60.0;
    const std::vector<CrossoverPoint> wrong{gain};
    CHECK_ERROR_CODE(gm_circle_check(wrong, kDefault), ErrorCode::KindMismatch);
}

TEST_CASE("critical_intersection") {
    const auto g = FrequencyGrid::log_spaced(1.0, 1e4, 2000);
    const auto first_order = oracle::sample(oracle::lowpass(2.0, 100.0, 1), g);
    const auto clean = critical_intersection(first_order, kDefault);
    CHECK_FALSE(clean.violates);
    CHECK(clean.offenders.empty());
    REQUIRE(clean.all.size() == 1);
    CHECK(clean.all[0].region == Region::Compliant);

    const auto bad = critical_intersection(falling_at(-170.0, g), kDefault);
    CHECK(bad.violates);
    REQUIRE(bad.offenders.size() == 1);
    CHECK(bad.offenders[0].crossover.pm_deg.value() == doctest::Approx(10.0).epsilon(1e-9));
    CHECK(bad.offenders[0].region == Region::Critical);

    CHECK_FALSE(critical_intersection(falling_at(-160.0, g), kDefault).violates);
}

TEST_CASE("contour_angle_deg") {
    std::vector<Complex> around;
    for (int k = 0; k < 64; ++k) around.push_back(-1.0 + 0.5 * std::polar(1.0, 2.0 * std::numbers::pi * k / 64.0));
    CHECK(contour_angle_deg(around) == doctest::Approx(360.0).epsilon(1e-12));
    std::vector<Complex> reversed(around.rbegin(), around.rend());
    CHECK(contour_angle_deg(reversed) == doctest::Approx(-360.0).epsilon(1e-12));
    std::vector<Complex> away;
    for (int k = 0; k < 64; ++k) away.push_back(2.0 + 0.5 * std::polar(1.0, 2.0 * std::numbers::pi * k / 64.0));
    CHECK(std::abs(contour_angle_deg(away)) < 1e-9);
}

TEST_CASE("nyquist_contour mirrors the locus") {
    gen::Rng rng(6002);
    const auto g = rng.grid(25);
    const auto l = rng.response(g, Unit::Dimensionless);
    const auto c = nyquist_contour(l);
    REQUIRE(c.size() == 2 * l.size());
    for (std::size_t i = 0; i < l.size(); ++i) {
        CHECK(c[i] == l[i]);
        CHECK(c[c.size() - 1 - i] == std::conj(l[i]));
    }
}

TEST_CASE("winding_number spot values") {
    const auto g = FrequencyGrid::log_spaced(1.0, 1e4, 2000);
    CurveMeta meta;
    meta.unit = Unit::Dimensionless;
    const FrequencyResponse half(g, std::vector<Complex>(g.size(), Complex(0.5, 0.0)), meta);
    const auto w0 = winding_number(half);
    CHECK(w0.winding == 0);
    CHECK(w0.min_distance_to_critical_point == doctest::Approx(1.5).epsilon(1e-12));

    CHECK(winding_number(oracle::sample(oracle::lowpass(10.0, 100.0, 3), g)).winding ==
          oracle::routh_rhp_roots(oracle::three_pole_characteristic(10.0)));
    CHECK(winding_number(oracle::sample(oracle::lowpass(10.0, 100.0, 3), g)).winding == 2);
    CHECK(winding_number(oracle::sample(oracle::lowpass(3.0, 100.0, 3), g)).winding == 0);

    std::vector<Complex> through(g.size(), Complex(0.5, 0.0));
    through[100] = Complex(-1.0, 0.0);
    CHECK_ERROR_CODE(winding_number(FrequencyResponse(g, through, meta)), ErrorCode::CriticalPointOnLocus);
}

TEST_CASE("property: winding equals the Routh count for stable open loops") {
    gen::Rng rng(6003);
    const auto g = FrequencyGrid::log_spaced(1e-1, 1e5, 4000);
    for (int trial = 0; trial < 40; ++trial) {
        double k = rng.log_uniform(0.2, 50.0);
        if (std::abs(k - 8.0) < 0.2) k = 4.0;  // K = 8 puts -1 on the locus
        const double fc = rng.log_uniform(20.0, 500.0);
        const auto result = winding_number(oracle::sample(oracle::lowpass(k, fc, 3), g));
        CHECK(result.winding == oracle::routh_rhp_roots(oracle::three_pole_characteristic(k)));
    }
}

TEST_CASE("coarse sampling is reported") {
    const auto g = FrequencyGrid::log_spaced(1.0, 1e4, 12);
    const auto result = winding_number(oracle::sample(oracle::lowpass(10.0, 100.0, 3), g));
    CHECK_FALSE(result.resolution_warnings.empty());
}

TEST_CASE("region names") {
    CHECK(to_string(Region::Caution) == "caution");
    CHECK(region_from_string("critical") == Region::Critical);
}

}  // TEST_SUITE
