#include "themeflow/series.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <string_view>

#include "json.hpp"

#include "numfmt.hpp"
#include "themeflow/errors.hpp"

namespace themeflow {
namespace {

// Largest mean drawn in one inverse-transform pass; exp(-mean) stays normal.
constexpr double kPoissonChunk = 500.0;

double uniform_open_closed(std::mt19937_64& rng) {
    return static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53;
}

double uniform_closed_open(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::uint64_t poisson_chunk(std::mt19937_64& rng, double mean) {
    const double u = uniform_closed_open(rng);
    double term = std::exp(-mean);
    double cdf = term;
    std::uint64_t k = 0;
    while (u > cdf) {
        ++k;
        term *= mean / static_cast<double>(k);
        cdf += term;
        // Rounding can leave cdf just under u in the far tail.
        if (term < 1e-300 && static_cast<double>(k) > mean) break;
    }
    return k;
}

// Sum of independent Poisson draws is Poisson with the summed mean.
double poisson(std::mt19937_64& rng, double mean) {
    if (mean <= 0.0) return 0.0;
    std::uint64_t total = 0;
    double remaining = mean;
    while (remaining > kPoissonChunk) {
        total += poisson_chunk(rng, kPoissonChunk);
        remaining -= kPoissonChunk;
    }
    total += poisson_chunk(rng, remaining);
    return static_cast<double>(total);
}

double standard_normal(std::mt19937_64& rng) {
    const double u1 = uniform_open_closed(rng);
    const double u2 = uniform_closed_open(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) {
        s.remove_suffix(1);
    }
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    return s;
}

void write_csv(const std::vector<std::string>& header, const std::vector<double>& times,
               const std::vector<std::vector<double>>& columns, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
    out << '\n';
    for (std::size_t i = 0; i < times.size(); ++i) {
        out << detail::format_double(times[i]);
        for (const auto& col : columns) out << ',' << detail::format_double(col[i]);
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace

void TimeSeries::validate() const {
    if (times.size() != counts.size()) throw InvalidParams("times and counts differ in length");
    for (std::size_t i = 0; i < size(); ++i) {
        if (!std::isfinite(times[i])) throw InvalidParams("non-finite sample time");
        if (!std::isfinite(counts[i]) || counts[i] < 0.0) {
            throw InvalidParams("counts must be finite and >= 0");
        }
        if (i > 0 && times[i] < times[i - 1]) throw NonMonotoneTime(i + 1);
    }
}

double TimeSeries::sample_interval() const {
    if (size() < 2) throw TooFewSamples("at least two samples are needed to infer the interval");
    std::vector<double> gaps;
    gaps.reserve(size() - 1);
    for (std::size_t i = 1; i < size(); ++i) gaps.push_back(times[i] - times[i - 1]);
    const auto mid = gaps.begin() + static_cast<std::ptrdiff_t>(gaps.size() / 2);
    std::nth_element(gaps.begin(), mid, gaps.end());
    if (!(*mid > 0.0)) throw InvalidParams("sample times must be spaced by a positive interval");
    return *mid;
}

void GeneratorSpec::validate() const {
    params.validate();
    if (!(std::isfinite(sample_interval) && sample_interval > 0.0)) {
        throw InvalidParams("sample_interval must be > 0");
    }
    if (!(std::isfinite(horizon) && horizon > params.duration)) {
        throw InvalidParams("horizon must exceed lambda");
    }
    if (noise == NoiseKind::gaussian && !(std::isfinite(sigma) && sigma >= 0.0)) {
        throw InvalidParams("gaussian sigma must be >= 0");
    }
}

TimeSeries generate(const GeneratorSpec& spec) {
    spec.validate();
    const FlowCurve curve(spec.params);
    std::mt19937_64 rng(spec.seed);
    const double dt = spec.sample_interval;
    const auto bins = static_cast<std::size_t>(std::floor(spec.horizon / dt + 1e-9));

    TimeSeries series;
    series.times.reserve(bins);
    series.counts.reserve(bins);
    for (std::size_t k = 0; k < bins; ++k) {
        const double mid = (static_cast<double>(k) + 0.5) * dt;
        const double expected = dt * curve(mid);
        double count = expected;
        switch (spec.noise) {
            case NoiseKind::none:
                break;
            case NoiseKind::poisson:
                count = poisson(rng, expected);
                break;
            case NoiseKind::gaussian:
                count = std::max(0.0, expected + spec.sigma * standard_normal(rng));
                break;
        }
        series.times.push_back(mid);
        series.counts.push_back(count);
    }
    return series;
}

TimeSeries read_series(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());

    std::string line;
    std::size_t row = 1;
    if (!std::getline(in, line)) throw ParseError(1, 1, "empty file, expected header time,count");
    if (trim(line) != "time,count") throw ParseError(1, 1, "expected header time,count");

    TimeSeries series;
    while (std::getline(in, line)) {
        ++row;
        const std::string_view text = trim(line);
        if (text.empty()) continue;
        const auto comma = text.find(',');
        if (comma == std::string_view::npos) throw ParseError(row, 2, "missing count column");
        const std::string_view time_field = trim(text.substr(0, comma));
        const std::string_view count_field = trim(text.substr(comma + 1));
        if (count_field.find(',') != std::string_view::npos) {
            throw ParseError(row, 3, "unexpected extra column");
        }
        double t = 0.0;
        double c = 0.0;
        if (!detail::parse_double(time_field, t) || !std::isfinite(t)) {
            throw ParseError(row, 1, "time is not a finite number");
        }
        if (!detail::parse_double(count_field, c) || !std::isfinite(c)) {
            throw ParseError(row, 2, "count is not a finite number");
        }
        if (c < 0.0) throw ParseError(row, 2, "count must be >= 0");
        if (!series.times.empty() && t < series.times.back()) throw NonMonotoneTime(row);
        series.times.push_back(t);
        series.counts.push_back(c);
    }
    if (in.bad()) throw IoError("read failed: " + path.string());
    return series;
}

void write_series(const TimeSeries& series, const std::filesystem::path& path) {
    write_csv({"time", "count"}, series.times, {series.counts}, path);
}

void PlotTable::add_column(std::string name, std::vector<double> values) {
    if (values.size() != times.size()) {
        throw InvalidParams("column '" + name + "' does not match the time axis length");
    }
    names.push_back(std::move(name));
    columns.push_back(std::move(values));
}

PlotTable curve_table(const FlowCurve& curve, double t0, double t1, double dt) {
    if (!(dt > 0.0) || !(t1 >= t0)) throw InvalidParams("range needs t0 <= t1 and dt > 0");
    if (!(t0 > 0.0)) throw OutOfWindow("the flow is defined for t > 0 only");
    PlotTable table;
    const auto n = static_cast<std::size_t>(std::floor((t1 - t0) / dt + 1e-9)) + 1;
    std::vector<double> values;
    for (std::size_t k = 0; k < n; ++k) {
        const double t = t0 + static_cast<double>(k) * dt;
        table.times.push_back(t);
        values.push_back(curve(t));
    }
    table.add_column("flow", std::move(values));
    return table;
}

PlotTable overlay_table(const TimeSeries& series, const FlowCurve& fitted) {
    const double dt = series.sample_interval();
    PlotTable table;
    table.times = series.times;
    std::vector<double> model;
    model.reserve(series.size());
    for (double t : series.times) model.push_back(dt * fitted(t));
    table.add_column("observed", series.counts);
    table.add_column("fitted", std::move(model));
    return table;
}

CurveMarkers markers_of(const FlowCurve& curve) {
    return {curve.saturation(), curve.background_level(), curve.inflection(),
            curve.params().duration};
}

std::filesystem::path markers_path_for(const std::filesystem::path& csv_path) {
    return std::filesystem::path(csv_path.string() + ".markers.json");
}

void export_plot_data(const PlotTable& table, const std::filesystem::path& path,
                      const std::optional<CurveMarkers>& markers,
                      const std::filesystem::path& markers_path) {
    if (table.columns.empty()) throw InvalidParams("nothing to export");
    std::vector<std::string> header{"time"};
    header.insert(header.end(), table.names.begin(), table.names.end());
    write_csv(header, table.times, table.columns, path);

    if (!markers) return;
    nlohmann::ordered_json j;
    j["u_s"] = markers->saturation;
    j["v_s"] = markers->background_level;
    j["t_inf"] = markers->inflection ? nlohmann::ordered_json(*markers->inflection)
                                     : nlohmann::ordered_json(nullptr);
    j["lambda"] = markers->duration;
    const auto target = markers_path.empty() ? markers_path_for(path) : markers_path;
    std::ofstream out(target, std::ios::binary);
    if (!out) throw IoError("cannot open " + target.string() + " for writing");
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failed: " + target.string());
}

}  // namespace themeflow
