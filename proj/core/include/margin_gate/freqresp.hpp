#pragma once

#include <complex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace margin_gate {

using Complex = std::complex<double>;

/// Strictly increasing, positive frequency axis in Hz with at least two points.
class FrequencyGrid {
public:
    explicit FrequencyGrid(std::vector<double> points_hz);

    /// `count` points spaced uniformly in log-frequency over [f_min, f_max].
    static FrequencyGrid log_spaced(double f_min_hz, double f_max_hz, std::size_t count);

    [[nodiscard]] std::span<const double> points() const noexcept { return points_; }
    [[nodiscard]] std::size_t size() const noexcept { return points_.size(); }
    [[nodiscard]] double operator[](std::size_t i) const noexcept { return points_[i]; }
    [[nodiscard]] double front() const noexcept { return points_.front(); }
    [[nodiscard]] double back() const noexcept { return points_.back(); }
    [[nodiscard]] bool contains(double f_hz) const noexcept {
        return f_hz >= points_.front() && f_hz <= points_.back();
    }

    friend bool operator==(const FrequencyGrid&, const FrequencyGrid&) = default;

private:
    std::vector<double> points_;
};

enum class Unit { Ohm, Dimensionless };
enum class Sequence { Positive, Negative, Untagged };

std::string_view to_string(Unit unit) noexcept;
std::string_view to_string(Sequence sequence) noexcept;
Sequence sequence_from_string(std::string_view text);

/// Free-text metadata carried with every curve.
struct CurveMeta {
    Unit unit = Unit::Ohm;
    Sequence sequence = Sequence::Untagged;
    std::string label;
    std::string operating_point;

    friend bool operator==(const CurveMeta&, const CurveMeta&) = default;
};

/// A complex-valued curve sampled on a FrequencyGrid. Immutable after
/// construction; the constructor rejects length mismatches and non-finite
/// samples.
class FrequencyResponse {
public:
    FrequencyResponse(FrequencyGrid grid, std::vector<Complex> samples, CurveMeta meta = {});

    [[nodiscard]] const FrequencyGrid& grid() const noexcept { return grid_; }
    [[nodiscard]] std::span<const Complex> samples() const noexcept { return samples_; }
    [[nodiscard]] std::size_t size() const noexcept { return samples_.size(); }
    [[nodiscard]] Complex operator[](std::size_t i) const noexcept { return samples_[i]; }
    [[nodiscard]] const CurveMeta& meta() const noexcept { return meta_; }
    [[nodiscard]] Unit unit() const noexcept { return meta_.unit; }

    /// Same samples, different metadata.
    [[nodiscard]] FrequencyResponse with_meta(CurveMeta meta) const;

    friend bool operator==(const FrequencyResponse&, const FrequencyResponse&) = default;

private:
    FrequencyGrid grid_;
    std::vector<Complex> samples_;
    CurveMeta meta_;
};

/// Unwrapped phase in degrees; consecutive entries differ by less than 180.
struct PhaseSeries {
    FrequencyGrid grid;
    std::vector<double> degrees;
};

// Text table I/O. Recognized headers:
//   freq_hz,re_ohm,im_ohm    freq_hz,mag_ohm,phase_deg   (unit ohm)
//   freq_hz,re,im            freq_hz,mag,phase_deg       (dimensionless)
// Comment lines start with '#'; `# key=value` sets sequence, label or
// operating_point.
FrequencyResponse parse_response(std::string_view content);
std::string write_response(const FrequencyResponse& response);

FrequencyResponse read_response_file(const std::string& path);
void write_response_file(const std::string& path, const FrequencyResponse& response);

/// Evaluates the curve at f. Grid nodes return the stored sample exactly;
/// between nodes, log-magnitude and unwrapped phase are interpolated linearly
/// in log-frequency. Throws OutOfRange outside the grid span.
Complex value_at(const FrequencyResponse& response, double f_hz);

/// Resamples every response onto the union of grid points inside the common
/// span. Responses already sharing one grid are returned unchanged.
std::vector<FrequencyResponse> align(std::span<const FrequencyResponse> responses);

PhaseSeries unwrap_phase(const FrequencyResponse& response);

/// Throws GridMismatch unless both grids are identical.
void require_same_grid(const FrequencyResponse& a, const FrequencyResponse& b);

}  // namespace margin_gate
