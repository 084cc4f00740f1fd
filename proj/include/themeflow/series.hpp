#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "themeflow/model.hpp"

namespace themeflow {

/// Publication counts per sampling interval. Times are interval midpoints.
struct TimeSeries {
    std::vector<double> times;
    std::vector<double> counts;

    std::size_t size() const noexcept { return times.size(); }

    /// Equal lengths, nondecreasing times, finite nonnegative counts.
    void validate() const;

    /// Median spacing between consecutive samples; counts divided by it give
    /// densities comparable to eval_flow. Requires at least two samples.
    double sample_interval() const;

    bool operator==(const TimeSeries&) const = default;
};

enum class NoiseKind { none, poisson, gaussian };

struct GeneratorSpec {
    TopicParams params;
    double sample_interval = 1.0;
    double horizon = 2.0;
    NoiseKind noise = NoiseKind::poisson;
    double sigma = 0.0;  ///< gaussian only
    std::uint64_t seed = 0;

    void validate() const;
};

/// Samples eval_flow at the midpoints of [k dt, (k+1) dt) for every interval
/// inside (0, horizon], multiplies by dt and applies the chosen noise.
///
/// Noise is drawn from std::mt19937_64 (fully specified by the C++ standard)
/// through an inverse-transform Poisson sampler and a Box-Muller normal
/// sampler implemented here, so a seed yields the same series on any
/// conforming platform. Gaussian counts are clamped at zero.
TimeSeries generate(const GeneratorSpec& spec);

/// Reads a `time,count` CSV. Throws ParseError with line/column context and
/// NonMonotoneTime naming the offending line.
TimeSeries read_series(const std::filesystem::path& path);

/// Writes a `time,count` CSV with LF endings and round-trip precision.
void write_series(const TimeSeries& series, const std::filesystem::path& path);

/// Column-aligned data for external plotting.
struct PlotTable {
    std::vector<double> times;
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;

    void add_column(std::string name, std::vector<double> values);
};

/// Closed-form curve sampled on t0, t0 + dt, ..., <= t1.
PlotTable curve_table(const FlowCurve& curve, double t0, double t1, double dt);

/// Observed counts next to the fitted curve converted to counts per interval.
PlotTable overlay_table(const TimeSeries& series, const FlowCurve& fitted);

struct CurveMarkers {
    double saturation;
    double background_level;
    std::optional<double> inflection;
    double duration;
};

CurveMarkers markers_of(const FlowCurve& curve);

/// Writes the CSV and, when markers are given, a sidecar JSON
/// {u_s, v_s, t_inf, lambda} at `markers_path`.
void export_plot_data(const PlotTable& table, const std::filesystem::path& path,
                      const std::optional<CurveMarkers>& markers = std::nullopt,
                      const std::filesystem::path& markers_path = {});

/// `<csv path>.markers.json`
std::filesystem::path markers_path_for(const std::filesystem::path& csv_path);

}  // namespace themeflow
