#pragma once

#include <string>

namespace margin_gate {
struct AssessmentReport;
}

namespace margin_gate::detail {

std::string render_nyquist_svg(const AssessmentReport& report);
std::string render_bode_svg(const AssessmentReport& report);

}  // namespace margin_gate::detail
