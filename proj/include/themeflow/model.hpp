#pragma once

#include <optional>

namespace themeflow {

/// Parameters of a single thematic flow.
///
/// The rising branch solves du/dt = p*u*(1 - q*u) + D*u in time shifted by the
/// lateness, starting from `initial_density` at t = lateness. After
/// `duration` the topic loses actuality and the flow relaxes along the
/// background logistic du/dt = p*u*(1 - q*u) toward 1/q.
struct TopicParams {
    double background_rate = 1.0;  ///< p > 0, 1/time
    double intensity = 0.0;        ///< D >= 0, 1/time, constant while the topic is active
    double inverse_level = 1.0;    ///< q > 0, inverse of the background carrying level
    double duration = 1.0;         ///< lambda > 0, end of the active window
    double lateness = 0.0;         ///< tau >= 0, media response delay
    double initial_density = 1.0;  ///< n0 > 0, density at t = lateness

    /// Throws InvalidParams naming the first violated bound.
    void validate() const;

    /// n0 above the saturation level: the rise branch decays from above.
    /// Accepted everywhere except inflection_time.
    bool starts_above_saturation() const;

    bool operator==(const TopicParams&) const = default;
};

/// (p + D) / (p q). Independent of n0 and tau.
double saturation_level(const TopicParams& params);

/// ln(u_s / n0 - 1) / (p + D) + tau. Throws NoInflection when n0 >= u_s.
double inflection_time(const TopicParams& params);

/// Closed-form rising branch on (0, lambda]. eval_u(tau) == n0.
double eval_u(const TopicParams& params, double t);

/// Closed-form decay branch for t > lambda, seeded with eval_u(lambda).
double eval_v(const TopicParams& params, double t);

/// Decay branch assuming the rise saturated before lambda, i.e. u(lambda) = u_s.
double eval_v_saturated(const TopicParams& params, double t);

/// Decay branch seeded with an explicit boundary value.
double eval_v_from(const TopicParams& params, double boundary_value, double t);

/// Early-time exponential n0 * exp((p + D)(t - tau)). Tracks eval_u while
/// t is well below the inflection time.
double exponential_regime_approx(const TopicParams& params, double t);

/// Composite curve: background hold at n0 on (0, tau), the rising branch on
/// [tau, lambda] and the decay branch after lambda, glued continuously at
/// lambda. Construction requires tau < lambda.
class FlowCurve {
public:
    explicit FlowCurve(const TopicParams& params);

    const TopicParams& params() const noexcept { return params_; }
    double saturation() const noexcept { return saturation_; }
    /// Post-topic asymptote 1/q.
    double background_level() const noexcept { return background_level_; }
    /// Empty when the rise starts at or above saturation.
    std::optional<double> inflection() const noexcept { return inflection_; }
    /// u(lambda), the crest value.
    double boundary_value() const noexcept { return boundary_value_; }

    double operator()(double t) const;

private:
    TopicParams params_;
    double saturation_;
    double background_level_;
    std::optional<double> inflection_;
    double boundary_value_;
};

/// Throws OutOfWindow for t <= 0.
double eval_flow(const FlowCurve& curve, double t);

// Legacy comparators.

/// Barton-Kebler obsolescence mixture. Rates are fixed at 1 and 2; rescale
/// time before calling to use other units.
struct LegacyParams {
    double a = 0.0;  ///< weight of the stable component
    double b = 0.0;  ///< weight of the dynamic component
    double k = 0.0;  ///< Malthus rate

    void validate() const;
};

/// n0 * exp(k t).
double malthus(double k, double n0, double t);

/// 1 - a e^{-t} - b e^{-2t}.
double obsolescence_share(const LegacyParams& legacy, double t);

}  // namespace themeflow
