#pragma once

#include <cmath>
#include <complex>
#include <numbers>

namespace margin_gate {

inline constexpr double kDegPerRad = 180.0 / std::numbers::pi;
inline constexpr double kRadPerDeg = std::numbers::pi / 180.0;

/// Principal angle of z in degrees, in (-180, 180].
inline double arg_deg(std::complex<double> z) noexcept {
    double a = std::arg(z) * kDegPerRad;
    if (a <= -180.0) a += 360.0;
    return a;
}

/// Maps any angle to (-180, 180].
inline double normalize_deg(double deg) noexcept {
    double a = std::fmod(deg, 360.0);
    if (a <= -180.0) a += 360.0;
    if (a > 180.0) a -= 360.0;
    return a;
}

/// Maps a phase step to [-180, 180). A step of exactly +-180 resolves to the
/// negative side.
inline double wrap_step_deg(double step) noexcept {
    double a = std::fmod(step, 360.0);
    if (a >= 180.0) a -= 360.0;
    if (a < -180.0) a += 360.0;
    return a;
}

inline double wrap_step_rad(double step) noexcept {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double a = std::fmod(step, two_pi);
    if (a >= std::numbers::pi) a -= two_pi;
    if (a < -std::numbers::pi) a += two_pi;
    return a;
}

/// sin of an angle in degrees, exact where the result is 0, +-1/2 or +-1.
inline double sin_deg(double deg) noexcept {
    double r = std::fmod(deg, 360.0);
    if (r < 0.0) r += 360.0;
    if (r == 0.0 || r == 180.0) return 0.0;
    if (r == 30.0 || r == 150.0) return 0.5;
    if (r == 90.0) return 1.0;
    if (r == 210.0 || r == 330.0) return -0.5;
    if (r == 270.0) return -1.0;
    return std::sin(deg * kRadPerDeg);
}

/// magnitude at angle `deg`, exact on the axes (multiples of 90 degrees).
inline std::complex<double> polar_deg(double magnitude, double deg) {
    const double r = std::fmod(deg, 360.0);
    if (std::fmod(r, 90.0) == 0.0) {
        const int quadrant = static_cast<int>(r / 90.0);
        switch ((quadrant % 4 + 4) % 4) {
            case 0: return {magnitude, 0.0};
            case 1: return {0.0, magnitude};
            case 2: return {-magnitude, 0.0};
            default: return {0.0, -magnitude};
        }
    }
    return std::polar(magnitude, deg * kRadPerDeg);
}

}  // namespace margin_gate
