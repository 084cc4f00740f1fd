#include "themeflow/fitting.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "themeflow/errors.hpp"
#include "themeflow/simplex.hpp"

namespace themeflow {
namespace {

// Coordinates of the full search: log p, log D, log q, log n0, lambda, tau.
constexpr std::size_t kDims = 6;
using Coords = std::array<double, kDims>;

constexpr int kInnerEvaluations = 1500;
constexpr int kPolishEvaluations = 6000;
constexpr int kPolishRounds = 12;
constexpr std::size_t kPolishedStarts = 4;

Coords to_coords(const TopicParams& p) {
    return {std::log(p.background_rate), std::log(p.intensity), std::log(p.inverse_level),
            std::log(p.initial_density), p.duration, p.lateness};
}

TopicParams from_coords(std::span<const double> x) {
    TopicParams p;
    p.background_rate = std::exp(x[0]);
    p.intensity = std::exp(x[1]);
    p.inverse_level = std::exp(x[2]);
    p.initial_density = std::exp(x[3]);
    p.duration = x[4];
    p.lateness = x[5];
    return p;
}

struct Problem {
    std::vector<double> times;
    std::vector<double> density;
    ParamBox box;
    double scale = 1.0;  ///< sum of squared densities, sets absolute tolerances

    double ssr(const TopicParams& params) const {
        if (!(params.lateness < params.duration)) return HUGE_VAL;
        const FlowCurve curve(params);
        double total = 0.0;
        for (std::size_t i = 0; i < times.size(); ++i) {
            const double r = curve(times[i]) - density[i];
            total += r * r;
        }
        return total;
    }

    // Objective over the full coordinates. Points outside the box are
    // evaluated at their projection plus a quadratic penalty on the distance.
    double objective(std::span<const double> x) const {
        const TopicParams raw = from_coords(x);
        const TopicParams inside = box.clamp(raw);
        const Coords cx = to_coords(inside);
        double dist2 = 0.0;
        for (std::size_t j = 0; j < kDims; ++j) dist2 += (x[j] - cx[j]) * (x[j] - cx[j]);
        const double base = ssr(inside);
        return dist2 == 0.0 ? base : base + (1.0 + base) * dist2;
    }

    double rms(const TopicParams& params) const {
        return std::sqrt(ssr(params) / static_cast<double>(times.size()));
    }
};

struct Candidate {
    Coords x;
    double value;
    std::size_t index;
};

double mean_of(std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Refines (p, D, q, n0) with the timing pinned at (lambda, tau).
Candidate refine_rates(const Problem& problem, const Coords& start, std::size_t index,
                       int& evaluations) {
    const double lambda = start[4];
    const double tau = start[5];
    auto objective = [&](std::span<const double> r) {
        const std::array<double, kDims> x{r[0], r[1], r[2], r[3], lambda, tau};
        return problem.objective(x);
    };
    SimplexOptions options;
    options.max_evaluations = kInnerEvaluations;
    options.f_tolerance = 1e-10;
    options.f_absolute = 1e-20 * problem.scale;
    options.x_tolerance = 1e-8;
    options.initial_step = {0.3, 0.3, 0.3, 0.3};
    const SimplexResult r =
        nelder_mead(objective, {start[0], start[1], start[2], start[3]}, options);
    evaluations += r.evaluations;
    return {{r.x[0], r.x[1], r.x[2], r.x[3], lambda, tau}, r.value, index};
}

// Repeated full-dimensional simplex runs from the incumbent until a restart
// no longer improves it.
SimplexResult polish(const Problem& problem, Coords start, double window, int& evaluations) {
    auto objective = [&](std::span<const double> x) { return problem.objective(x); };
    SimplexResult best;
    best.x.assign(start.begin(), start.end());
    best.value = problem.objective(start);
    double scale = 1.0;
    for (int round = 0; round < kPolishRounds; ++round) {
        SimplexOptions options;
        options.max_evaluations = kPolishEvaluations;
        options.f_tolerance = 1e-12;
        options.f_absolute = 1e-24 * problem.scale;
        options.x_tolerance = 1e-9;
        options.initial_step = {0.05 * scale, 0.05 * scale, 0.05 * scale, 0.05 * scale,
                                0.01 * window * scale, 0.01 * window * scale};
        const SimplexResult r = nelder_mead(objective, best.x, options);
        evaluations += r.evaluations;
        const bool improved = r.value < best.value * (1.0 - 1e-9);
        if (r.value <= best.value) {
            best.x = r.x;
            best.value = r.value;
            best.converged = r.converged;
        }
        if (!improved && r.converged) {
            best.converged = true;
            break;
        }
        scale = improved ? 1.0 : scale * 0.1;
    }
    return best;
}

FitResult degenerate_fit(const Problem& problem, double interval) {
    const double level = problem.density.front();
    const ParamBox& box = problem.box;
    TopicParams params;
    params.intensity = 0.0;
    params.background_rate = std::clamp(1.0, box.lower.background_rate, box.upper.background_rate);
    params.inverse_level = level > 0.0 ? std::clamp(1.0 / level, box.lower.inverse_level,
                                                    box.upper.inverse_level)
                                       : box.upper.inverse_level;
    params.initial_density = level > 0.0 ? level : 1e-12;
    params.duration = box.upper.duration;
    params.lateness = box.lower.lateness;

    FitResult result;
    result.params = params;
    result.status = FitStatus::degenerate;
    result.converged = false;
    result.sample_interval = interval;
    result.residual_rms = problem.rms(params);
    result.phase_boundaries = {params.lateness, params.duration};
    return result;
}

}  // namespace

ParamBox ParamBox::defaults_for(const TimeSeries& series) {
    const double interval = series.sample_interval();
    const double max_density =
        *std::max_element(series.counts.begin(), series.counts.end()) / interval;
    const double top = max_density > 0.0 ? max_density : 1.0;
    ParamBox box;
    box.lower = {1e-4, 1e-4, 1e-6, series.times.front(), 0.0, top * 1e-9};
    box.upper = {10.0, 10.0, 1.0, series.times.back(), series.times.back(), top};
    return box;
}

void ParamBox::validate() const {
    lower.validate();
    upper.validate();
    auto check = [](double lo, double hi, const char* name) {
        if (!(lo <= hi)) throw InvalidParams(std::string("empty parameter box for ") + name);
    };
    check(lower.background_rate, upper.background_rate, "p");
    check(lower.intensity, upper.intensity, "D");
    check(lower.inverse_level, upper.inverse_level, "q");
    check(lower.duration, upper.duration, "lambda");
    check(lower.lateness, upper.lateness, "tau");
    check(lower.initial_density, upper.initial_density, "n0");
    if (!(lower.intensity > 0.0)) {
        throw InvalidParams("the fit searches D in log space; its lower bound must be > 0");
    }
}

TopicParams ParamBox::clamp(const TopicParams& p) const {
    return {std::clamp(p.background_rate, lower.background_rate, upper.background_rate),
            std::clamp(p.intensity, lower.intensity, upper.intensity),
            std::clamp(p.inverse_level, lower.inverse_level, upper.inverse_level),
            std::clamp(p.duration, lower.duration, upper.duration),
            std::clamp(p.lateness, lower.lateness, upper.lateness),
            std::clamp(p.initial_density, lower.initial_density, upper.initial_density)};
}

FitResult fit(const TimeSeries& series, const std::optional<ParamBox>& bounds) {
    series.validate();
    if (series.size() < kMinFitSamples) {
        throw TooFewSamples("fitting needs at least " + std::to_string(kMinFitSamples) +
                            " samples, got " + std::to_string(series.size()));
    }
    if (!(series.times.front() > 0.0)) {
        throw OutOfWindow("the flow is defined for t > 0 only; first sample time is " +
                          std::to_string(series.times.front()));
    }
    const double interval = series.sample_interval();

    Problem problem;
    problem.times = series.times;
    problem.density.reserve(series.size());
    for (double c : series.counts) problem.density.push_back(c / interval);
    problem.box = bounds ? *bounds : ParamBox::defaults_for(series);
    problem.box.validate();
    for (double v : problem.density) problem.scale += v * v;

    const auto& y = problem.density;
    if (std::all_of(y.begin(), y.end(), [&](double v) { return v == y.front(); })) {
        return degenerate_fit(problem, interval);
    }

    const ParamBox& box = problem.box;
    const double t_first = series.times.front();
    const double t_last = series.times.back();
    const double window = t_last - t_first;
    const auto peak = static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
    const double y_max = y[peak];
    const std::size_t tail_len = std::max<std::size_t>(1, y.size() / 10);
    const double tail =
        mean_of(std::span<const double>(y).subspan(y.size() - tail_len, tail_len));

    // Starting grid over the timing parameters.
    std::vector<double> lambdas{series.times[peak]};
    for (int k = 1; k < 8; ++k) lambdas.push_back(t_first + window * k / 8.0);
    const std::array<double, 5> tau_fractions{0.0, 0.15, 0.3, 0.5, 0.7};
    const std::array<double, 2> rate_guesses{0.1, 1.0};

    int evaluations = 0;
    std::vector<Candidate> candidates;
    std::size_t index = 0;
    for (double lambda_raw : lambdas) {
        const double lambda = std::clamp(lambda_raw, box.lower.duration, box.upper.duration);
        for (double frac : tau_fractions) {
            const double tau_lo = std::max(box.lower.lateness, t_first);
            const double tau = std::clamp(tau_lo + frac * (lambda - tau_lo), box.lower.lateness,
                                          std::min(box.upper.lateness, lambda));
            if (!(tau < lambda)) continue;
            const auto at_tau = static_cast<std::size_t>(
                std::lower_bound(series.times.begin(), series.times.end(), tau) -
                series.times.begin());
            const double n0_guess = y[std::min(at_tau, y.size() - 1)];
            for (double p_guess : rate_guesses) {
                TopicParams guess;
                guess.background_rate = p_guess;
                guess.inverse_level = tail > 0.0 ? 1.0 / tail : 1.0;
                guess.intensity =
                    std::max(1e-3, p_guess * (guess.inverse_level * y_max - 1.0));
                guess.initial_density = n0_guess > 0.0 ? n0_guess : 0.01 * y_max;
                guess.duration = lambda;
                guess.lateness = tau;
                guess = box.clamp(guess);
                candidates.push_back(refine_rates(problem, to_coords(guess), index++, evaluations));
            }
        }
    }

    std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        return a.value < b.value || (a.value == b.value && a.index < b.index);
    });

    SimplexResult best;
    best.value = HUGE_VAL;
    const std::size_t polished = std::min(kPolishedStarts, candidates.size());
    for (std::size_t i = 0; i < polished; ++i) {
        SimplexResult r = polish(problem, candidates[i].x, window, evaluations);
        if (r.value < best.value) best = std::move(r);
    }

    FitResult result;
    result.params = box.clamp(from_coords(best.x));
    result.residual_rms = problem.rms(result.params);
    result.converged = best.converged;
    result.iterations = evaluations;
    result.phase_boundaries = {result.params.lateness, result.params.duration};
    result.status = FitStatus::ok;
    result.sample_interval = interval;
    return result;
}

std::string to_string(PhaseLabel label) {
    switch (label) {
        case PhaseLabel::background: return "background";
        case PhaseLabel::rise: return "rise";
        case PhaseLabel::saturation: return "saturation";
        case PhaseLabel::decline: return "decline";
        case PhaseLabel::stabilized: return "stabilized";
    }
    return "unknown";
}

std::vector<PhaseSegment> classify_phases(const TimeSeries& series, const FitResult& fit,
                                          const PhaseThresholds& thresholds) {
    if (!fit.converged) throw NotConverged("phase classification needs a converged fit");
    const FlowCurve curve(fit.params);
    const TopicParams& p = curve.params();
    const double us = curve.saturation();
    const double vs = curve.background_level();
    // u_s / v_s = 1 + D/p: without a thematic excess there is nothing to rise.
    const bool thematic = p.intensity / p.background_rate > thresholds.saturation;

    std::vector<PhaseLabel> labels;
    labels.reserve(series.size());
    for (double t : series.times) {
        PhaseLabel label;
        if (t <= p.duration) {
            if (!thematic || t < p.lateness || t <= 0.0) {
                label = PhaseLabel::background;
            } else {
                label = std::abs(curve(t) - us) <= thresholds.saturation * us ? PhaseLabel::saturation
                                                                              : PhaseLabel::rise;
            }
        } else if (!thematic) {
            label = PhaseLabel::stabilized;
        } else {
            label = std::abs(curve(t) - vs) <= thresholds.stabilized * vs ? PhaseLabel::stabilized
                                                                          : PhaseLabel::decline;
        }
        if (!labels.empty()) label = std::max(label, labels.back());
        labels.push_back(label);
    }

    std::vector<PhaseSegment> segments;
    std::size_t cursor = 0;
    for (PhaseLabel label : {PhaseLabel::background, PhaseLabel::rise, PhaseLabel::saturation,
                             PhaseLabel::decline, PhaseLabel::stabilized}) {
        const std::size_t begin = cursor;
        while (cursor < labels.size() && labels[cursor] == label) ++cursor;
        segments.push_back({label, begin, cursor});
    }
    return segments;
}

MalthusFit fit_malthus(const TimeSeries& series) {
    series.validate();
    if (series.size() < kMinFitSamples) {
        throw TooFewSamples("fitting needs at least " + std::to_string(kMinFitSamples) +
                            " samples, got " + std::to_string(series.size()));
    }
    const double interval = series.sample_interval();
    std::vector<double> y;
    y.reserve(series.size());
    for (double c : series.counts) y.push_back(c / interval);

    // Log-linear regression over positive samples seeds the simplex.
    double st = 0, sl = 0, stt = 0, stl = 0, n = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (!(y[i] > 0.0)) continue;
        const double t = series.times[i];
        const double l = std::log(y[i]);
        st += t;
        sl += l;
        stt += t * t;
        stl += t * l;
        n += 1;
    }
    double rate = 0.0;
    double log_initial = std::log(std::max(mean_of(y), 1e-12));
    if (n >= 2 && n * stt - st * st > 0.0) {
        rate = (n * stl - st * sl) / (n * stt - st * st);
        log_initial = (sl - rate * st) / n;
    }

    auto ssr = [&](std::span<const double> x) {
        double total = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            const double r = std::exp(x[0] + x[1] * series.times[i]) - y[i];
            total += r * r;
        }
        return total;
    };
    const double span = series.times.back() - series.times.front();
    SimplexOptions options;
    options.max_evaluations = 4000;
    options.initial_step = {0.1, span > 0.0 ? 0.1 / span : 0.1};
    SimplexResult r = nelder_mead(ssr, {log_initial, rate}, options);
    r = nelder_mead(ssr, r.x, options);

    MalthusFit out;
    out.initial = std::exp(r.x[0]);
    out.rate = r.x[1];
    out.residual_rms = std::sqrt(r.value / static_cast<double>(y.size()));
    return out;
}

std::vector<ModelScore> compare_models(const TimeSeries& series) {
    const FitResult logistic = fit(series);
    const MalthusFit exponential = fit_malthus(series);
    const bool constant = logistic.status == FitStatus::degenerate;
    std::vector<ModelScore> scores{
        {"logistic", logistic.residual_rms, constant},
        {"malthus", exponential.residual_rms, constant},
    };
    std::stable_sort(scores.begin(), scores.end(), [](const ModelScore& a, const ModelScore& b) {
        return a.residual_rms < b.residual_rms;
    });
    return scores;
}

}  // namespace themeflow
