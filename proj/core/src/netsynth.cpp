#include "margin_gate/netsynth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <json.hpp>

#include "margin_gate/error.hpp"
#include "text_util.hpp"

namespace margin_gate {

using json = nlohmann::ordered_json;

namespace {

constexpr double kSingularTol = 1e-12;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

void require_conjugate_pairs(const std::vector<Complex>& roots, const char* what) {
    std::vector<Complex> upper;
    std::vector<Complex> lower;
    for (const auto& r : roots) {
        if (!std::isfinite(r.real()) || !std::isfinite(r.imag())) {
            throw Error(ErrorCode::InvalidNetwork, std::string("non-finite rational ") + what);
        }
        if (r.imag() > 0.0) upper.push_back(r);
        if (r.imag() < 0.0) lower.push_back(std::conj(r));
    }
    const auto order = [](Complex a, Complex b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    };
    std::sort(upper.begin(), upper.end(), order);
    std::sort(lower.begin(), lower.end(), order);
    bool paired = upper.size() == lower.size();
    for (std::size_t i = 0; paired && i < upper.size(); ++i) {
        paired = std::abs(upper[i] - lower[i]) <= 1e-9 * std::abs(upper[i]);
    }
    if (!paired) {
        throw Error(ErrorCode::InvalidNetwork,
                    std::string("complex rational ") + what + " must appear in conjugate pairs");
    }
}

struct Validator {
    void operator()(const Resistor& e) const {
        if (!positive_finite(e.r_ohm)) throw Error(ErrorCode::InvalidNetwork, "resistance must be > 0");
    }
    void operator()(const Inductor& e) const {
        if (!positive_finite(e.l_h)) throw Error(ErrorCode::InvalidNetwork, "inductance must be > 0");
    }
    void operator()(const Capacitor& e) const {
        if (!positive_finite(e.c_f)) throw Error(ErrorCode::InvalidNetwork, "capacitance must be > 0");
    }
    void operator()(const Rational& e) const {
        if (!std::isfinite(e.gain) || e.gain == 0.0) {
            throw Error(ErrorCode::InvalidNetwork, "rational gain must be finite and non-zero");
        }
        require_conjugate_pairs(e.zeros_rad_s, "zeros");
        require_conjugate_pairs(e.poles_rad_s, "poles");
    }
    void operator()(const Thevenin& e) const {
        if (!positive_finite(e.v_ll_volt) || !positive_finite(e.s_sc_va) || !positive_finite(e.xr)) {
            throw Error(ErrorCode::InvalidNetwork, "thevenin voltage, short-circuit power and X/R must be > 0");
        }
    }
    void operator()(const Series& e) const {
        if (e.children.size() < 2) throw Error(ErrorCode::InvalidNetwork, "series needs at least two children");
    }
    void operator()(const Parallel& e) const {
        if (e.children.size() < 2) throw Error(ErrorCode::InvalidNetwork, "parallel needs at least two children");
    }
};

bool same_roots(const std::vector<Complex>& a, const std::vector<Complex>& b) { return a == b; }

}  // namespace

bool operator==(const Resistor& a, const Resistor& b) { return a.r_ohm == b.r_ohm; }
bool operator==(const Inductor& a, const Inductor& b) { return a.l_h == b.l_h; }
bool operator==(const Capacitor& a, const Capacitor& b) { return a.c_f == b.c_f; }
bool operator==(const Rational& a, const Rational& b) {
    return a.gain == b.gain && same_roots(a.zeros_rad_s, b.zeros_rad_s) && same_roots(a.poles_rad_s, b.poles_rad_s);
}
bool operator==(const Thevenin& a, const Thevenin& b) {
    return a.v_ll_volt == b.v_ll_volt && a.s_sc_va == b.s_sc_va && a.xr == b.xr;
}
bool operator==(const Series& a, const Series& b) { return a.children == b.children; }
bool operator==(const Parallel& a, const Parallel& b) { return a.children == b.children; }

NetworkElement::NetworkElement(Variant v) {
    std::visit(Validator{}, v);
    node_ = std::make_shared<const Variant>(std::move(v));
}

bool operator==(const NetworkElement& a, const NetworkElement& b) {
    return a.node_ == b.node_ || *a.node_ == *b.node_;
}

Complex par(Complex z1, Complex z2) {
    const Complex sum = z1 + z2;
    if (std::abs(sum) < kSingularTol * std::max(std::abs(z1), std::abs(z2)) || sum == Complex(0.0, 0.0)) {
        throw Error(ErrorCode::ResonanceSingular, "parallel branches cancel (antiresonance)");
    }
    // equal branches halve exactly; the product form rounds
    if (z1 == z2) return z1 * 0.5;
    return z1 * z2 / sum;
}

Complex thevenin_impedance(const Thevenin& t, double f_hz) {
    const double z_mag = t.v_ll_volt * t.v_ll_volt / t.s_sc_va;
    const double r = z_mag / std::sqrt(1.0 + t.xr * t.xr);
    const double x_nominal = r * t.xr;
    return {r, x_nominal * f_hz / kNominalFrequencyHz};
}

namespace {

struct Evaluator {
    double f_hz;

    Complex operator()(const Resistor& e) const { return {e.r_ohm, 0.0}; }
    Complex operator()(const Inductor& e) const { return {0.0, kTwoPi * f_hz * e.l_h}; }
    Complex operator()(const Capacitor& e) const { return {0.0, -1.0 / (kTwoPi * f_hz * e.c_f)}; }
    Complex operator()(const Rational& e) const {
        const Complex s(0.0, kTwoPi * f_hz);
        Complex num(e.gain, 0.0);
        for (const auto& z : e.zeros_rad_s) num *= (s - z);
        Complex den(1.0, 0.0);
        for (const auto& p : e.poles_rad_s) {
            const Complex d = s - p;
            if (std::abs(d) <= kSingularTol * std::max(std::abs(s), std::abs(p))) {
                throw Error(ErrorCode::SingularAtFrequency,
                            "rational pole on the j-omega axis at " + detail::format_double(f_hz) + " Hz");
            }
            den *= d;
        }
        return num / den;
    }
    Complex operator()(const Thevenin& e) const { return thevenin_impedance(e, f_hz); }
    Complex operator()(const Series& e) const {
        Complex total(0.0, 0.0);
        for (const auto& c : e.children) total = ser(total, eval_at(c, f_hz));
        return total;
    }
    Complex operator()(const Parallel& e) const {
        Complex total = eval_at(e.children.front(), f_hz);
        for (std::size_t i = 1; i < e.children.size(); ++i) {
            try {
                total = par(total, eval_at(e.children[i], f_hz));
            } catch (const Error& err) {
                if (err.code() != ErrorCode::ResonanceSingular) throw;
                throw Error(ErrorCode::SingularAtFrequency,
                            "parallel branch sum vanishes at " + detail::format_double(f_hz) + " Hz");
            }
        }
        return total;
    }
};

}  // namespace

Complex eval_at(const NetworkElement& element, double f_hz) {
    return std::visit(Evaluator{f_hz}, element.variant());
}

FrequencyResponse eval_network(const NetworkElement& element, const FrequencyGrid& grid, CurveMeta meta) {
    std::vector<Complex> samples(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        samples[i] = eval_at(element, grid[i]);
        if (!std::isfinite(samples[i].real()) || !std::isfinite(samples[i].imag())) {
            throw Error(ErrorCode::SingularAtFrequency,
                        "impedance overflows at " + detail::format_double(grid[i]) + " Hz");
        }
    }
    meta.unit = Unit::Ohm;
    return FrequencyResponse(grid, std::move(samples), std::move(meta));
}

namespace {

struct Scaler {
    double k;

    NetworkElement operator()(const Resistor& e) const { return Resistor{e.r_ohm * k}; }
    NetworkElement operator()(const Inductor& e) const { return Inductor{e.l_h * k}; }
    NetworkElement operator()(const Capacitor& e) const { return Capacitor{e.c_f / k}; }
    NetworkElement operator()(const Rational& e) const { return Rational{e.gain * k, e.zeros_rad_s, e.poles_rad_s}; }
    NetworkElement operator()(const Thevenin& e) const { return Thevenin{e.v_ll_volt, e.s_sc_va / k, e.xr}; }
    NetworkElement operator()(const Series& e) const {
        Series out;
        for (const auto& c : e.children) out.children.push_back(scale_impedance(c, k));
        return out;
    }
    NetworkElement operator()(const Parallel& e) const {
        Parallel out;
        for (const auto& c : e.children) out.children.push_back(scale_impedance(c, k));
        return out;
    }
};

json roots_to_json(const std::vector<Complex>& roots) {
    json arr = json::array();
    for (const auto& r : roots) arr.push_back(json::array({r.real(), r.imag()}));
    return arr;
}

std::vector<Complex> roots_from_json(const json& j) {
    std::vector<Complex> out;
    for (const auto& pair : j) {
        if (!pair.is_array() || pair.size() != 2) {
            throw Error(ErrorCode::InvalidNetwork, "roots must be [re, im] pairs");
        }
        out.emplace_back(pair[0].get<double>(), pair[1].get<double>());
    }
    return out;
}

struct ToJson {
    json operator()(const Resistor& e) const { return {{"type", "resistor"}, {"r_ohm", e.r_ohm}}; }
    json operator()(const Inductor& e) const { return {{"type", "inductor"}, {"l_h", e.l_h}}; }
    json operator()(const Capacitor& e) const { return {{"type", "capacitor"}, {"c_f", e.c_f}}; }
    json operator()(const Rational& e) const {
        return {{"type", "rational"},
                {"gain", e.gain},
                {"zeros_rad_s", roots_to_json(e.zeros_rad_s)},
                {"poles_rad_s", roots_to_json(e.poles_rad_s)}};
    }
    json operator()(const Thevenin& e) const {
        return {{"type", "thevenin"}, {"v_ll_volt", e.v_ll_volt}, {"s_sc_va", e.s_sc_va}, {"xr", e.xr}};
    }
    json operator()(const Series& e) const { return composite("series", e.children); }
    json operator()(const Parallel& e) const { return composite("parallel", e.children); }

    json composite(const char* type, const std::vector<NetworkElement>& children) const {
        json arr = json::array();
        for (const auto& c : children) arr.push_back(std::visit(*this, c.variant()));
        return {{"type", type}, {"children", std::move(arr)}};
    }
};

NetworkElement element_from_json(const json& j) {
    if (!j.is_object() || !j.contains("type")) {
        throw Error(ErrorCode::InvalidNetwork, "network element must be an object with a \"type\" key");
    }
    const auto type = j.at("type").get<std::string>();
    try {
        if (type == "resistor") return Resistor{j.at("r_ohm").get<double>()};
        if (type == "inductor") return Inductor{j.at("l_h").get<double>()};
        if (type == "capacitor") return Capacitor{j.at("c_f").get<double>()};
        if (type == "thevenin") {
            return Thevenin{j.at("v_ll_volt").get<double>(), j.at("s_sc_va").get<double>(), j.at("xr").get<double>()};
        }
        if (type == "rational") {
            return Rational{j.at("gain").get<double>(), roots_from_json(j.value("zeros_rad_s", json::array())),
                            roots_from_json(j.value("poles_rad_s", json::array()))};
        }
        if (type == "series" || type == "parallel") {
            std::vector<NetworkElement> children;
            for (const auto& c : j.at("children")) children.push_back(element_from_json(c));
            if (type == "series") return Series{std::move(children)};
            return Parallel{std::move(children)};
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidNetwork, "element '" + type + "': " + e.what());
    }
    throw Error(ErrorCode::InvalidNetwork, "unknown element type '" + type + "'");
}

json parse_json(std::string_view text) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidNetwork, std::string("malformed JSON: ") + e.what());
    }
}

json grid_to_json(const FrequencyGrid& grid) {
    const auto log_grid = FrequencyGrid::log_spaced(grid.front(), grid.back(), grid.size());
    if (log_grid == grid) {
        return {{"f_min_hz", grid.front()}, {"f_max_hz", grid.back()}, {"points", grid.size()}};
    }
    json pts = json::array();
    for (double f : grid.points()) pts.push_back(f);
    return {{"points_hz", std::move(pts)}};
}

FrequencyGrid grid_from_json(const json& j) {
    try {
        if (j.contains("points_hz")) return FrequencyGrid(j.at("points_hz").get<std::vector<double>>());
        return FrequencyGrid::log_spaced(j.at("f_min_hz").get<double>(), j.at("f_max_hz").get<double>(),
                                         j.at("points").get<std::size_t>());
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidNetwork, std::string("grid: ") + e.what());
    }
}

}  // namespace

NetworkElement scale_impedance(const NetworkElement& element, double k) {
    if (!positive_finite(k)) throw Error(ErrorCode::InvalidArgument, "impedance scale must be > 0");
    return std::visit(Scaler{k}, element.variant());
}

std::string network_to_json(const NetworkElement& element) {
    return std::visit(ToJson{}, element.variant()).dump(2);
}

NetworkElement network_from_json(std::string_view text) {
    return element_from_json(parse_json(text));
}

bool operator==(const CaseFixture& a, const CaseFixture& b) {
    return a.z_ppm_existing == b.z_ppm_existing && a.z_net_old == b.z_net_old && a.z_ppm_new == b.z_ppm_new &&
           a.grid == b.grid && a.seed == b.seed && a.rejected_sub_seeds == b.rejected_sub_seeds;
}

std::string case_to_json(const CaseFixture& fixture) {
    json j;
    j["seed"] = fixture.seed;
    j["rejected_sub_seeds"] = fixture.rejected_sub_seeds;
    j["grid"] = grid_to_json(fixture.grid);
    j["z_ppm_existing"] = std::visit(ToJson{}, fixture.z_ppm_existing.variant());
    j["z_net_old"] = std::visit(ToJson{}, fixture.z_net_old.variant());
    j["z_ppm_new"] = std::visit(ToJson{}, fixture.z_ppm_new.variant());
    return j.dump(2) + "\n";
}

CaseFixture case_from_json(std::string_view text) {
    const json j = parse_json(text);
    for (const char* key : {"grid", "z_ppm_existing", "z_net_old", "z_ppm_new"}) {
        if (!j.contains(key)) throw Error(ErrorCode::InvalidNetwork, std::string("case is missing \"") + key + "\"");
    }
    CaseFixture c{element_from_json(j.at("z_ppm_existing")), element_from_json(j.at("z_net_old")),
                  element_from_json(j.at("z_ppm_new")), grid_from_json(j.at("grid")),
                  j.value("seed", std::uint64_t{0}), j.value("rejected_sub_seeds", std::vector<std::uint64_t>{})};
    // all three must evaluate on the grid
    (void)eval_network(c.z_ppm_existing, c.grid);
    (void)eval_network(c.z_net_old, c.grid);
    (void)eval_network(c.z_ppm_new, c.grid);
    return c;
}

// -- random case generation ---------------------------------------------------

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Portable generator: identical streams on every platform and standard library.
class CaseRng {
public:
    explicit CaseRng(std::uint64_t seed) : state_(seed) {}

    double uniform() { return static_cast<double>(splitmix64(state_) >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
    bool coin(double p) { return uniform() < p; }

private:
    std::uint64_t state_;
};

// A string or plant: converter branch (R-L, optionally with a lead-lag control
// term) in parallel with a damped harmonic filter.
NetworkElement random_ppm(CaseRng& rng) {
    Series converter{{Resistor{rng.log_uniform(0.2, 3.0)}, Inductor{rng.log_uniform(5e-3, 60e-3)}}};
    if (rng.coin(0.5)) {
        const double w_zero = kTwoPi * rng.log_uniform(50.0, 500.0);
        const double w_pole = kTwoPi * rng.log_uniform(500.0, 5000.0);
        converter.children.push_back(Rational{rng.log_uniform(0.5, 5.0), {Complex(-w_zero, 0.0)}, {Complex(-w_pole, 0.0)}});
    }
    Series filter{{Resistor{rng.log_uniform(0.5, 10.0)}, Capacitor{rng.log_uniform(0.5e-6, 10e-6)}}};
    return Parallel{{std::move(converter), std::move(filter)}};
}

NetworkElement random_network(CaseRng& rng, int n_strings) {
    Parallel net;
    net.children.push_back(Thevenin{66e3, rng.log_uniform(300e6, 3000e6), rng.uniform(5.0, 15.0)});
    net.children.push_back(Series{{Resistor{rng.log_uniform(0.05, 1.0)}, Capacitor{rng.log_uniform(1e-6, 20e-6)}}});
    for (int i = 1; i < n_strings; ++i) net.children.push_back(random_ppm(rng));
    return net;
}

bool usable(const FrequencyResponse& z) {
    return std::all_of(z.samples().begin(), z.samples().end(), [](Complex v) { return std::abs(v) > 1e-12; });
}

}  // namespace

CaseFixture random_case(std::uint64_t seed, int n_strings, double f_min_hz, double f_max_hz) {
    if (n_strings < 1) throw Error(ErrorCode::InvalidArgument, "n_strings must be >= 1");
    const FrequencyGrid grid = FrequencyGrid::log_spaced(f_min_hz, f_max_hz, kRandomCasePoints);

    constexpr int kMaxAttempts = 16;
    // Keeps |Z_net,old / Z_new| within three decades so that scaling Z_new by
    // 1e9 or 1e-9 reaches the open- and short-circuit limits to 1e-6.
    constexpr double kMinImpedanceRatio = 1e-3;
    std::vector<std::uint64_t> rejected;
    std::uint64_t sub_state = seed;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        const std::uint64_t sub_seed = attempt == 0 ? seed : splitmix64(sub_state);
        CaseRng rng(sub_seed);
        try {
            NetworkElement ppm = random_ppm(rng);
            NetworkElement net = random_network(rng, n_strings);
            NetworkElement ppm_new = random_ppm(rng);
            const auto z_ppm = eval_network(ppm, grid);
            const auto z_net = eval_network(net, grid);
            const auto z_new = eval_network(ppm_new, grid);
            bool ok = usable(z_ppm) && usable(z_net) && usable(z_new);
            for (std::size_t i = 0; ok && i < grid.size(); ++i) {
                const double ratio = std::abs(z_net[i] / z_new[i]);
                ok = std::abs(Complex(1.0, 0.0) + z_net[i] / z_new[i]) > 1e-9 && ratio > kMinImpedanceRatio &&
                     ratio < 1.0 / kMinImpedanceRatio;
            }
            if (ok) {
                return CaseFixture{std::move(ppm), std::move(net), std::move(ppm_new), grid, seed, rejected};
            }
        } catch (const Error&) {
        }
        rejected.push_back(sub_seed);
    }
    std::string seeds;
    for (auto s : rejected) seeds += (seeds.empty() ? "" : ", ") + std::to_string(s);
    throw Error(ErrorCode::GenerationFailed, "no usable fixture for seed " + std::to_string(seed) +
                                                 " after rejected sub-seeds [" + seeds + "]");
}

}  // namespace margin_gate
