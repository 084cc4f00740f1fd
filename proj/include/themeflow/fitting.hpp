#pragma once

#include <optional>
#include <string>
#include <vector>

#include "themeflow/model.hpp"
#include "themeflow/series.hpp"

namespace themeflow {

inline constexpr std::size_t kMinFitSamples = 8;

/// Inclusive box for the six parameters.
struct ParamBox {
    TopicParams lower;
    TopicParams upper;

    /// p, D in [1e-4, 10], q in [1e-6, 1], lambda in the observation window,
    /// tau in [0, last sample], n0 in (0, max density].
    static ParamBox defaults_for(const TimeSeries& series);

    void validate() const;
    TopicParams clamp(const TopicParams& params) const;
};

enum class FitStatus { ok, degenerate };

struct PhaseBoundaries {
    double rise_start = 0.0;  ///< fitted tau
    double topic_end = 0.0;   ///< fitted lambda
};

struct FitResult {
    TopicParams params;
    double residual_rms = 0.0;  ///< in densities (counts / sample interval)
    bool converged = false;
    int iterations = 0;  ///< objective evaluations across all starts
    PhaseBoundaries phase_boundaries;
    FitStatus status = FitStatus::ok;
    double sample_interval = 1.0;
};

/// Least-squares fit of the composite flow to counts / sample interval.
///
/// A grid of (lambda, tau) starts is refined over (p, D, q, n0) with the
/// timing held fixed; the best starts are then polished over all six
/// parameters. Everything runs in log space for the positive rates. The
/// search is deterministic.
///
/// Throws TooFewSamples below kMinFitSamples. A constant series returns
/// status degenerate, converged = false, D = 0 and a background-only fit.
FitResult fit(const TimeSeries& series, const std::optional<ParamBox>& bounds = std::nullopt);

enum class PhaseLabel { background, rise, saturation, decline, stabilized };

std::string to_string(PhaseLabel label);

/// Samples [begin, end) carry `label`. Empty when begin == end.
struct PhaseSegment {
    PhaseLabel label;
    std::size_t begin = 0;
    std::size_t end = 0;

    bool empty() const noexcept { return begin == end; }
};

struct PhaseThresholds {
    double saturation = 0.05;  ///< relative distance to u_s counted as saturated
    double stabilized = 0.05;  ///< relative distance to v_s counted as stabilized
};

/// All five segments, always in the order background, rise, saturation,
/// decline, stabilized; together they cover every sample. Throws
/// NotConverged when the fit did not converge.
std::vector<PhaseSegment> classify_phases(const TimeSeries& series, const FitResult& fit,
                                          const PhaseThresholds& thresholds = {});

struct ModelScore {
    std::string name;
    double residual_rms = 0.0;
    bool degenerate = false;
};

/// Fitted Malthus growth n0 exp(k t).
struct MalthusFit {
    double rate = 0.0;
    double initial = 0.0;
    double residual_rms = 0.0;
};

MalthusFit fit_malthus(const TimeSeries& series);

/// Fits the Malthus and logistic-flow models and ranks them by residual,
/// best first.
std::vector<ModelScore> compare_models(const TimeSeries& series);

}  // namespace themeflow
