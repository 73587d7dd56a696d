#include "margin_gate/policy.hpp"

#include <string>

#include "margin_gate/error.hpp"
#include "text_util.hpp"

namespace margin_gate {

void MarginPolicy::validate() const {
    const bool ok = std::isfinite(pm_min_deg) && std::isfinite(pm_cau_deg) && std::isfinite(gm_min_db) &&
                    pm_min_deg > 0.0 && pm_min_deg <= pm_cau_deg && pm_cau_deg < 180.0 && gm_min_db >= 0.0;
    if (!ok) {
        throw Error(ErrorCode::InvalidPolicy, "need 0 < pm_min <= pm_cau < 180 and gm_min >= 0 (got pm_min=" +
                                                  detail::format_double(pm_min_deg) +
                                                  ", pm_cau=" + detail::format_double(pm_cau_deg) +
                                                  ", gm_min=" + detail::format_double(gm_min_db) + ")");
    }
}

std::string_view to_string(Verdict v) noexcept {
    switch (v) {
        case Verdict::Compliant: return "compliant";
        case Verdict::Caution: return "caution";
        case Verdict::Violation: return "violation";
        case Verdict::Error: return "error";
    }
    return "error";
}

Verdict verdict_from_string(std::string_view text) {
    if (text == "compliant") return Verdict::Compliant;
    if (text == "caution") return Verdict::Caution;
    if (text == "violation") return Verdict::Violation;
    if (text == "error") return Verdict::Error;
    throw Error(ErrorCode::InvalidArgument, "unknown verdict '" + std::string(text) + "'");
}

}  // namespace margin_gate
