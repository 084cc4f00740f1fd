#include "themeflow/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "themeflow/errors.hpp"

namespace themeflow {
namespace {

// exp() beyond these arguments over/underflows; the closed forms have finite
// limits there, so clamping the argument reproduces the limit.
constexpr double kMaxExpArg = 700.0;

double clamped_exp(double arg) { return std::exp(std::clamp(arg, -kMaxExpArg, kMaxExpArg)); }

void require(bool ok, const char* what) {
    if (!ok) throw InvalidParams(what);
}

}  // namespace

void TopicParams::validate() const {
    require(std::isfinite(background_rate) && background_rate > 0, "p must be finite and > 0");
    require(std::isfinite(intensity) && intensity >= 0, "D must be finite and >= 0");
    require(std::isfinite(inverse_level) && inverse_level > 0, "q must be finite and > 0");
    require(std::isfinite(duration) && duration > 0, "lambda must be finite and > 0");
    require(std::isfinite(lateness) && lateness >= 0, "tau must be finite and >= 0");
    require(std::isfinite(initial_density) && initial_density > 0, "n0 must be finite and > 0");
}

bool TopicParams::starts_above_saturation() const {
    return initial_density > saturation_level(*this);
}

double saturation_level(const TopicParams& params) {
    return (params.background_rate + params.intensity) /
           (params.background_rate * params.inverse_level);
}

double inflection_time(const TopicParams& params) {
    const double us = saturation_level(params);
    if (params.initial_density >= us) {
        throw NoInflection("n0 >= u_s: the rising branch has no inflection point");
    }
    const double rate = params.background_rate + params.intensity;
    return std::log(us / params.initial_density - 1.0) / rate + params.lateness;
}

double eval_u(const TopicParams& params, double t) {
    if (!(t > 0.0 && t <= params.duration)) {
        throw OutOfWindow("rise branch is defined on 0 < t <= lambda, got t = " +
                          std::to_string(t));
    }
    const double us = saturation_level(params);
    const double rate = params.background_rate + params.intensity;
    const double denom =
        1.0 + (us / params.initial_density - 1.0) * clamped_exp(-rate * (t - params.lateness));
    if (!(denom > 0.0)) {
        // Logistic from above, evaluated before its backward-time pole.
        throw OutOfWindow("rise branch started above saturation diverges at t = " +
                          std::to_string(t));
    }
    return us / denom;
}

double eval_v_from(const TopicParams& params, double boundary_value, double t) {
    if (!(t > params.duration)) {
        throw OutOfWindow("decay branch is defined for t > lambda, got t = " + std::to_string(t));
    }
    const double qu = params.inverse_level * boundary_value;
    const double decay = clamped_exp(-params.background_rate * (t - params.duration));
    return boundary_value / (qu + (1.0 - qu) * decay);
}

double eval_v(const TopicParams& params, double t) {
    if (!(t > params.duration)) {
        throw OutOfWindow("decay branch is defined for t > lambda, got t = " + std::to_string(t));
    }
    return eval_v_from(params, eval_u(params, params.duration), t);
}

double eval_v_saturated(const TopicParams& params, double t) {
    if (!(t > params.duration)) {
        throw OutOfWindow("decay branch is defined for t > lambda, got t = " + std::to_string(t));
    }
    const double p = params.background_rate;
    const double d = params.intensity;
    const double vs = 1.0 / params.inverse_level;
    return vs * (p + d) / (p + d * (1.0 - clamped_exp(-p * (t - params.duration))));
}

double exponential_regime_approx(const TopicParams& params, double t) {
    const double rate = params.background_rate + params.intensity;
    return params.initial_density * clamped_exp(rate * (t - params.lateness));
}

FlowCurve::FlowCurve(const TopicParams& params) : params_(params) {
    params_.validate();
    if (!(params_.lateness < params_.duration)) {
        throw InvalidParams("tau must be < lambda: the topic must take effect before it expires");
    }
    saturation_ = saturation_level(params_);
    background_level_ = 1.0 / params_.inverse_level;
    if (params_.initial_density < saturation_) inflection_ = inflection_time(params_);
    boundary_value_ = eval_u(params_, params_.duration);
}

double FlowCurve::operator()(double t) const {
    if (!(t > 0.0)) {
        throw OutOfWindow("the flow is defined for t > 0 only, got t = " + std::to_string(t));
    }
    if (t < params_.lateness) return params_.initial_density;
    if (t <= params_.duration) return eval_u(params_, t);
    return eval_v_from(params_, boundary_value_, t);
}

double eval_flow(const FlowCurve& curve, double t) { return curve(t); }

void LegacyParams::validate() const {
    require(std::isfinite(a) && a >= 0, "a must be finite and >= 0");
    require(std::isfinite(b) && b >= 0, "b must be finite and >= 0");
    require(a + b <= 1.0, "a + b must not exceed 1");
    require(std::isfinite(k), "k must be finite");
}

double malthus(double k, double n0, double t) { return n0 * std::exp(k * t); }

double obsolescence_share(const LegacyParams& legacy, double t) {
    return 1.0 - legacy.a * std::exp(-t) - legacy.b * std::exp(-2.0 * t);
}

}  // namespace themeflow
