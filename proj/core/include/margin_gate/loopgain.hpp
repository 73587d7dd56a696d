#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "margin_gate/freqresp.hpp"

namespace margin_gate {

enum class Derivation { Direct, Factored };

std::string_view to_string(Derivation d) noexcept;

/// How a loop-gain curve was produced. Direct: Z_net / Z_ppm. Factored:
/// L_old / (1 + rho).
struct LoopGainDerivation {
    Derivation method = Derivation::Direct;
    std::vector<std::string> inputs;
};

struct LoopGain {
    FrequencyResponse curve;
    LoopGainDerivation derivation;
};

struct LoopGainUpdate {
    LoopGain l_new;
    /// F = 1 / (1 + rho)
    FrequencyResponse sensitivity;
};

/// Minor-loop gain Z_net / Z_ppm on a shared grid.
LoopGain loop_gain(const FrequencyResponse& z_net, const FrequencyResponse& z_ppm);

/// Impedance ratio rho = Z_net,old / Z_new.
FrequencyResponse rho(const FrequencyResponse& z_net_old, const FrequencyResponse& z_new);

/// 1 + rho, pointwise. Interpolating this curve (rather than rho) keeps the
/// decomposition exact between grid nodes.
FrequencyResponse one_plus(const FrequencyResponse& ratio);

/// L_new = L_old / (1 + rho). Throws SingularSensitivity where |1 + rho| < 1e-12.
LoopGainUpdate update_loop_gain(const FrequencyResponse& l_old, const FrequencyResponse& rho);

/// max_f |direct - factored| / max(|direct|, 1e-30)
double consistency_error(const FrequencyResponse& l_direct, const FrequencyResponse& l_factored);

}  // namespace margin_gate
