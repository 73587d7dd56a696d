#include "margin_gate/loopgain.hpp"

#include <algorithm>
#include <cmath>

#include "margin_gate/error.hpp"
#include "text_util.hpp"

namespace margin_gate {

std::string_view to_string(Derivation d) noexcept {
    return d == Derivation::Direct ? "direct" : "factored";
}

namespace {

FrequencyResponse ratio(const FrequencyResponse& num, const FrequencyResponse& den, std::string label) {
    require_same_grid(num, den);
    std::vector<Complex> out(num.size());
    for (std::size_t i = 0; i < num.size(); ++i) {
        if (den[i] == Complex(0.0, 0.0)) {
            throw Error(ErrorCode::ZeroDenominator, "'" + den.meta().label + "' vanishes at " +
                                                        detail::format_double(den.grid()[i]) + " Hz");
        }
        out[i] = num[i] / den[i];
    }
    CurveMeta meta = num.meta();
    meta.unit = Unit::Dimensionless;
    meta.label = std::move(label);
    return FrequencyResponse(num.grid(), std::move(out), std::move(meta));
}

std::string quotient_label(const FrequencyResponse& num, const FrequencyResponse& den) {
    return (num.meta().label.empty() ? std::string("num") : num.meta().label) + "/" +
           (den.meta().label.empty() ? std::string("den") : den.meta().label);
}

}  // namespace

LoopGain loop_gain(const FrequencyResponse& z_net, const FrequencyResponse& z_ppm) {
    return LoopGain{ratio(z_net, z_ppm, "L=" + quotient_label(z_net, z_ppm)),
                    LoopGainDerivation{Derivation::Direct, {z_net.meta().label, z_ppm.meta().label}}};
}

FrequencyResponse rho(const FrequencyResponse& z_net_old, const FrequencyResponse& z_new) {
    return ratio(z_net_old, z_new, "rho=" + quotient_label(z_net_old, z_new));
}

FrequencyResponse one_plus(const FrequencyResponse& r) {
    std::vector<Complex> out(r.size());
    std::transform(r.samples().begin(), r.samples().end(), out.begin(),
                   [](Complex v) { return Complex(1.0, 0.0) + v; });
    CurveMeta meta = r.meta();
    meta.label = "1+" + meta.label;
    return FrequencyResponse(r.grid(), std::move(out), std::move(meta));
}

LoopGainUpdate update_loop_gain(const FrequencyResponse& l_old, const FrequencyResponse& r) {
    require_same_grid(l_old, r);
    std::vector<Complex> l_new(l_old.size());
    std::vector<Complex> f(l_old.size());
    for (std::size_t i = 0; i < l_old.size(); ++i) {
        const Complex d = Complex(1.0, 0.0) + r[i];
        if (std::abs(d) < 1e-12) {
            throw Error(ErrorCode::SingularSensitivity,
                        "|1+rho| vanishes at " + detail::format_double(l_old.grid()[i]) + " Hz");
        }
        f[i] = Complex(1.0, 0.0) / d;
        l_new[i] = l_old[i] / d;
    }
    CurveMeta meta = l_old.meta();
    meta.unit = Unit::Dimensionless;
    meta.label = "L_new(factored)";
    CurveMeta f_meta = meta;
    f_meta.label = "F";
    return LoopGainUpdate{
        LoopGain{FrequencyResponse(l_old.grid(), std::move(l_new), std::move(meta)),
                 LoopGainDerivation{Derivation::Factored, {l_old.meta().label, r.meta().label}}},
        FrequencyResponse(l_old.grid(), std::move(f), std::move(f_meta))};
}

double consistency_error(const FrequencyResponse& l_direct, const FrequencyResponse& l_factored) {
    require_same_grid(l_direct, l_factored);
    double worst = 0.0;
    for (std::size_t i = 0; i < l_direct.size(); ++i) {
        const double err = std::abs(l_direct[i] - l_factored[i]) / std::max(std::abs(l_direct[i]), 1e-30);
        worst = std::max(worst, err);
    }
    return worst;
}

}  // namespace margin_gate
