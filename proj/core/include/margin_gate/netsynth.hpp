#pragma once

#include <concepts>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "margin_gate/freqresp.hpp"

namespace margin_gate {

/// Parallel combination Z1*Z2/(Z1+Z2). Throws ResonanceSingular when
/// |Z1+Z2| < 1e-12 * max(|Z1|, |Z2|).
Complex par(Complex z1, Complex z2);
inline Complex ser(Complex z1, Complex z2) noexcept { return z1 + z2; }

// Network element tree. Parameter values are SI units; pole/zero locations in
// rad/s.

struct Resistor {
    double r_ohm;
};
struct Inductor {
    double l_h;
};
struct Capacitor {
    double c_f;
};
/// gain * prod(s - zero) / prod(s - pole), s = j*2*pi*f.
struct Rational {
    double gain;
    std::vector<Complex> zeros_rad_s;
    std::vector<Complex> poles_rad_s;
};
/// Grid equivalent sized from short-circuit power, realized as series R-L whose
/// reactance at 50 Hz equals R * xr.
struct Thevenin {
    double v_ll_volt;
    double s_sc_va;
    double xr;
};

class NetworkElement;

struct Series {
    std::vector<NetworkElement> children;
};
struct Parallel {
    std::vector<NetworkElement> children;
};

class NetworkElement {
public:
    using Variant = std::variant<Resistor, Inductor, Capacitor, Rational, Thevenin, Series, Parallel>;

    // Validating constructor: throws InvalidNetwork on non-positive parameters,
    // zero gain, unpaired complex roots, or composites with fewer than two
    // children.
    NetworkElement(Variant v);  // NOLINT(google-explicit-constructor)

    template <typename T>
        requires(!std::same_as<std::remove_cvref_t<T>, Variant> &&
                 !std::same_as<std::remove_cvref_t<T>, NetworkElement> && std::constructible_from<Variant, T>)
    NetworkElement(T&& alternative)  // NOLINT(google-explicit-constructor)
        : NetworkElement(Variant(std::forward<T>(alternative))) {}

    [[nodiscard]] const Variant& variant() const noexcept { return *node_; }

    friend bool operator==(const NetworkElement& a, const NetworkElement& b);

private:
    std::shared_ptr<const Variant> node_;
};

using NetworkDescription = NetworkElement;

bool operator==(const Resistor& a, const Resistor& b);
bool operator==(const Inductor& a, const Inductor& b);
bool operator==(const Capacitor& a, const Capacitor& b);
bool operator==(const Rational& a, const Rational& b);
bool operator==(const Thevenin& a, const Thevenin& b);
bool operator==(const Series& a, const Series& b);
bool operator==(const Parallel& a, const Parallel& b);

inline constexpr double kNominalFrequencyHz = 50.0;

/// Impedance of a Thevenin equivalent at the given frequency.
Complex thevenin_impedance(const Thevenin& t, double f_hz);

/// Impedance of the tree at one frequency.
Complex eval_at(const NetworkElement& element, double f_hz);

/// Impedance response (unit ohm) over a grid. Throws SingularAtFrequency.
FrequencyResponse eval_network(const NetworkElement& element, const FrequencyGrid& grid, CurveMeta meta = {});

/// Every R, L and C (and Rational gain) scaled so the impedance is multiplied by k.
NetworkElement scale_impedance(const NetworkElement& element, double k);

// JSON form: {"type":"parallel","children":[{"type":"resistor","r_ohm":1.0}, ...]}
std::string network_to_json(const NetworkElement& element);
NetworkElement network_from_json(std::string_view text);

/// Three impedance trees plus the grid they are evaluated on.
struct CaseFixture {
    NetworkDescription z_ppm_existing;
    NetworkDescription z_net_old;
    NetworkDescription z_ppm_new;
    FrequencyGrid grid;
    std::uint64_t seed = 0;
    std::vector<std::uint64_t> rejected_sub_seeds;
};

bool operator==(const CaseFixture& a, const CaseFixture& b);

std::string case_to_json(const CaseFixture& fixture);
CaseFixture case_from_json(std::string_view text);

inline constexpr std::size_t kRandomCasePoints = 2000;

/// Deterministic synthetic study case: an existing PPM, a network of grid plus
/// `n_strings - 1` further strings and cable capacitance, and a new PPM. All
/// three evaluate without singularities on a 2000-point log grid over the span,
/// and |Z_net,old / Z_new| stays within [1e-3, 1e3]. Rejected attempts are
/// retried with derived sub-seeds, which the fixture records.
CaseFixture random_case(std::uint64_t seed, int n_strings, double f_min_hz, double f_max_hz);

}  // namespace margin_gate
