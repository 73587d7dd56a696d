#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace margin_gate::detail {

std::string_view trim(std::string_view text) noexcept;
std::vector<std::string_view> split(std::string_view text, char sep);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double value);
/// Fixed-point with `decimals` digits after the point.
std::string format_fixed(double value, int decimals);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace margin_gate::detail
