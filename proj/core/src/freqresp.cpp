#include "margin_gate/freqresp.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

#include "margin_gate/angles.hpp"
#include "margin_gate/error.hpp"
#include "text_util.hpp"

namespace margin_gate {

FrequencyGrid::FrequencyGrid(std::vector<double> points_hz) : points_(std::move(points_hz)) {
    if (points_.size() < 2) {
        throw Error(ErrorCode::EmptyTable, "a frequency grid needs at least two points");
    }
    for (std::size_t i = 0; i < points_.size(); ++i) {
        const double f = points_[i];
        if (!std::isfinite(f)) throw Error(ErrorCode::NonFiniteValue, "non-finite frequency");
        if (f <= 0.0) {
            throw Error(ErrorCode::NonMonotonicFrequency,
                        "frequency must be positive, got " + detail::format_double(f));
        }
        if (i > 0 && f <= points_[i - 1]) {
            throw Error(ErrorCode::NonMonotonicFrequency,
                        "frequency " + detail::format_double(f) + " Hz does not exceed its predecessor");
        }
    }
}

FrequencyGrid FrequencyGrid::log_spaced(double f_min_hz, double f_max_hz, std::size_t count) {
    if (count < 2 || !(f_min_hz > 0.0) || !(f_max_hz > f_min_hz)) {
        throw Error(ErrorCode::InvalidArgument, "log grid needs 0 < f_min < f_max and count >= 2");
    }
    std::vector<double> pts(count);
    const double lo = std::log(f_min_hz);
    const double hi = std::log(f_max_hz);
    for (std::size_t i = 0; i < count; ++i) {
        pts[i] = std::exp(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1));
    }
    pts.front() = f_min_hz;
    pts.back() = f_max_hz;
    return FrequencyGrid(std::move(pts));
}

std::string_view to_string(Unit unit) noexcept {
    return unit == Unit::Ohm ? "ohm" : "dimensionless";
}

std::string_view to_string(Sequence sequence) noexcept {
    switch (sequence) {
        case Sequence::Positive: return "positive";
        case Sequence::Negative: return "negative";
        case Sequence::Untagged: return "untagged";
    }
    return "untagged";
}

Sequence sequence_from_string(std::string_view text) {
    if (text == "positive") return Sequence::Positive;
    if (text == "negative") return Sequence::Negative;
    if (text == "untagged" || text.empty()) return Sequence::Untagged;
    throw Error(ErrorCode::InvalidArgument, "unknown sequence tag '" + std::string(text) + "'");
}

FrequencyResponse::FrequencyResponse(FrequencyGrid grid, std::vector<Complex> samples, CurveMeta meta)
    : grid_(std::move(grid)), samples_(std::move(samples)), meta_(std::move(meta)) {
    if (samples_.size() != grid_.size()) {
        throw Error(ErrorCode::InvalidArgument, "sample count " + std::to_string(samples_.size()) +
                                                    " differs from grid length " + std::to_string(grid_.size()));
    }
    for (std::size_t i = 0; i < samples_.size(); ++i) {
        if (!std::isfinite(samples_[i].real()) || !std::isfinite(samples_[i].imag())) {
            throw Error(ErrorCode::NonFiniteValue,
                        "non-finite sample at " + detail::format_double(grid_[i]) + " Hz");
        }
    }
}

FrequencyResponse FrequencyResponse::with_meta(CurveMeta meta) const {
    FrequencyResponse copy = *this;
    copy.meta_ = std::move(meta);
    return copy;
}

namespace {

enum class Layout { Rectangular, Polar };

struct HeaderInfo {
    Layout layout;
    Unit unit;
};

std::optional<HeaderInfo> recognize_header(std::string_view line) {
    std::string compact;
    for (char c : line) {
        if (c != ' ' && c != '\t') compact.push_back(c);
    }
    if (compact == "freq_hz,re_ohm,im_ohm") return HeaderInfo{Layout::Rectangular, Unit::Ohm};
    if (compact == "freq_hz,mag_ohm,phase_deg") return HeaderInfo{Layout::Polar, Unit::Ohm};
    if (compact == "freq_hz,re,im") return HeaderInfo{Layout::Rectangular, Unit::Dimensionless};
    if (compact == "freq_hz,mag,phase_deg") return HeaderInfo{Layout::Polar, Unit::Dimensionless};
    return std::nullopt;
}

double parse_field(std::string_view field, std::size_t line_no) {
    field = detail::trim(field);
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    double value = 0.0;
    const auto* first = field.data();
    const auto* last = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec == std::errc::result_out_of_range) {
        throw Error(ErrorCode::NonFiniteValue, "value out of range on line " + std::to_string(line_no));
    }
    if (ec != std::errc() || ptr != last || field.empty()) {
        throw Error(ErrorCode::MalformedRow,
                    "cannot read number '" + std::string(field) + "' on line " + std::to_string(line_no));
    }
    if (!std::isfinite(value)) {
        throw Error(ErrorCode::NonFiniteValue, "non-finite value on line " + std::to_string(line_no));
    }
    return value;
}

void apply_metadata(std::string_view comment, CurveMeta& meta) {
    const auto eq = comment.find('=');
    if (eq == std::string_view::npos) return;
    const auto key = detail::trim(comment.substr(0, eq));
    const auto value = detail::trim(comment.substr(eq + 1));
    if (key == "sequence") {
        meta.sequence = sequence_from_string(value);
    } else if (key == "label") {
        meta.label = std::string(value);
    } else if (key == "operating_point") {
        meta.operating_point = std::string(value);
    }
}

std::string single_line(const std::string& text) {
    std::string out = text;
    std::replace_if(out.begin(), out.end(), [](char c) { return c == '\n' || c == '\r'; }, ' ');
    return out;
}

}  // namespace

FrequencyResponse parse_response(std::string_view content) {
    CurveMeta meta;
    std::optional<HeaderInfo> header;
    std::vector<double> freqs;
    std::vector<Complex> samples;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= content.size()) {
        auto end = content.find('\n', pos);
        if (end == std::string_view::npos) end = content.size();
        std::string_view line = content.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        line = detail::trim(line);
        if (line.empty()) {
            if (end == content.size()) break;
            continue;
        }
        if (line.front() == '#') {
            apply_metadata(line.substr(1), meta);
            continue;
        }
        if (!header) {
            header = recognize_header(line);
            if (!header) throw Error(ErrorCode::UnknownHeader, "unrecognized header '" + std::string(line) + "'");
            continue;
        }
        const auto fields = detail::split(line, ',');
        if (fields.size() != 3) {
            throw Error(ErrorCode::MalformedRow, "expected 3 columns on line " + std::to_string(line_no));
        }
        const double f = parse_field(fields[0], line_no);
        const double a = parse_field(fields[1], line_no);
        const double b = parse_field(fields[2], line_no);
        if (!freqs.empty() && f <= freqs.back()) {
            throw Error(ErrorCode::NonMonotonicFrequency,
                        "frequency " + detail::format_double(f) + " Hz on line " + std::to_string(line_no) +
                            " does not exceed its predecessor");
        }
        freqs.push_back(f);
        if (header->layout == Layout::Rectangular) {
            samples.emplace_back(a, b);
        } else {
            samples.push_back(polar_deg(a, b));
        }
        if (end == content.size()) break;
    }
    if (!header) throw Error(ErrorCode::EmptyTable, "no header row found");
    if (freqs.size() < 2) throw Error(ErrorCode::EmptyTable, "table has fewer than two data rows");
    meta.unit = header->unit;
    return FrequencyResponse(FrequencyGrid(std::move(freqs)), std::move(samples), std::move(meta));
}

std::string write_response(const FrequencyResponse& response) {
    const auto& meta = response.meta();
    std::string out;
    out.reserve(response.size() * 64 + 128);
    out += "# sequence=";
    out += to_string(meta.sequence);
    out += "\n# label=";
    out += single_line(meta.label);
    out += "\n# operating_point=";
    out += single_line(meta.operating_point);
    out += '\n';
    out += meta.unit == Unit::Ohm ? "freq_hz,re_ohm,im_ohm\n" : "freq_hz,re,im\n";
    const auto& grid = response.grid();
    for (std::size_t i = 0; i < response.size(); ++i) {
        out += detail::format_double(grid[i]);
        out += ',';
        out += detail::format_double(response[i].real());
        out += ',';
        out += detail::format_double(response[i].imag());
        out += '\n';
    }
    return out;
}

FrequencyResponse read_response_file(const std::string& path) {
    return parse_response(detail::read_file(path));
}

void write_response_file(const std::string& path, const FrequencyResponse& response) {
    detail::write_file(path, write_response(response));
}

Complex value_at(const FrequencyResponse& response, double f_hz) {
    const auto pts = response.grid().points();
    if (!(f_hz >= pts.front() && f_hz <= pts.back())) {
        throw Error(ErrorCode::OutOfRange, detail::format_double(f_hz) + " Hz lies outside [" +
                                               detail::format_double(pts.front()) + ", " +
                                               detail::format_double(pts.back()) + "] Hz");
    }
    const auto it = std::lower_bound(pts.begin(), pts.end(), f_hz);
    const auto hi = static_cast<std::size_t>(it - pts.begin());
    if (*it == f_hz) return response[hi];

    const std::size_t lo = hi - 1;
    const Complex z0 = response[lo];
    const Complex z1 = response[hi];
    const double t = (std::log(f_hz) - std::log(pts[lo])) / (std::log(pts[hi]) - std::log(pts[lo]));

    const double m0 = std::abs(z0);
    const double m1 = std::abs(z1);
    if (m0 == 0.0 || m1 == 0.0) {
        // log-magnitude undefined; fall back to rectangular interpolation
        return z0 + t * (z1 - z0);
    }
    const double log_mag = std::log(m0) + t * (std::log(m1) - std::log(m0));
    const double a0 = std::arg(z0);
    const double phase = a0 + t * wrap_step_rad(std::arg(z1) - a0);
    return std::polar(std::exp(log_mag), phase);
}

void require_same_grid(const FrequencyResponse& a, const FrequencyResponse& b) {
    if (!(a.grid() == b.grid())) {
        throw Error(ErrorCode::GridMismatch, "curves '" + a.meta().label + "' and '" + b.meta().label +
                                                 "' are not sampled on the same grid; align them first");
    }
}

std::vector<FrequencyResponse> align(std::span<const FrequencyResponse> responses) {
    std::vector<FrequencyResponse> out(responses.begin(), responses.end());
    if (out.size() < 2) return out;
    const bool same = std::all_of(out.begin() + 1, out.end(),
                                  [&](const FrequencyResponse& r) { return r.grid() == out.front().grid(); });
    if (same) return out;

    double lo = out.front().grid().front();
    double hi = out.front().grid().back();
    for (const auto& r : out) {
        lo = std::max(lo, r.grid().front());
        hi = std::min(hi, r.grid().back());
    }
    if (!(lo < hi)) {
        throw Error(ErrorCode::DisjointSpans, "grid spans do not overlap (common span [" +
                                                  detail::format_double(lo) + ", " + detail::format_double(hi) + "] Hz)");
    }
    std::vector<double> merged;
    for (const auto& r : out) {
        for (double f : r.grid().points()) {
            if (f >= lo && f <= hi) merged.push_back(f);
        }
    }
    std::sort(merged.begin(), merged.end());
    merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
    if (merged.size() < 2) {
        throw Error(ErrorCode::DisjointSpans, "common span holds fewer than two grid points");
    }
    FrequencyGrid grid(std::move(merged));
    for (auto& r : out) {
        std::vector<Complex> resampled(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) resampled[i] = value_at(r, grid[i]);
        r = FrequencyResponse(grid, std::move(resampled), r.meta());
    }
    return out;
}

PhaseSeries unwrap_phase(const FrequencyResponse& response) {
    std::vector<double> deg(response.size());
    for (std::size_t i = 0; i < response.size(); ++i) {
        const Complex z = response[i];
        if (z == Complex(0.0, 0.0)) {
            throw Error(ErrorCode::ZeroMagnitudeSample,
                        "phase undefined at " + detail::format_double(response.grid()[i]) + " Hz");
        }
        const double principal = arg_deg(z);
        if (i == 0) {
            deg[i] = principal;
            continue;
        }
        const double prev = deg[i - 1];
        // keep the unwrapped value congruent to the principal angle
        double candidate = principal + 360.0 * std::round((prev - principal) / 360.0);
        const double step = candidate - prev;
        if (step >= 180.0) candidate -= 360.0;
        if (step < -180.0) candidate += 360.0;
        deg[i] = candidate;
    }
    return PhaseSeries{response.grid(), std::move(deg)};
}

}  // namespace margin_gate
