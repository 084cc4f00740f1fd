#include "themeflow/ode.hpp"

#include <cmath>
#include <fstream>
#include <string>

#include "numfmt.hpp"
#include "themeflow/errors.hpp"

namespace themeflow {
namespace {

// dn/dt = growth * n - p q n^2, with growth = p + D on the rise and p after.
struct Logistic {
    double growth;
    double crowding;

    double operator()(double n) const { return growth * n - crowding * n * n; }
};

double advance(const Logistic& f, Method method, double n, double h) {
    if (method == Method::euler) return n + h * f(n);
    const double k1 = f(n);
    const double k2 = f(n + 0.5 * h * k1);
    const double k3 = f(n + 0.5 * h * k2);
    const double k4 = f(n + h * k3);
    return n + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Grid start, start + h, ..., end; the final step is shortened so that `end`
// is a node. Nodes are computed as start + k h, not by accumulation.
std::vector<double> make_grid(double start, double end, double h) {
    const double span = end - start;
    const auto steps = static_cast<std::size_t>(std::ceil(span / h - 1e-9));
    std::vector<double> grid;
    grid.reserve(steps + 1);
    for (std::size_t k = 0; k < steps; ++k) grid.push_back(start + static_cast<double>(k) * h);
    grid.push_back(end);
    return grid;
}

Trajectory integrate(const Logistic& f, Method method, double start, double end, double n0,
                     double h) {
    Trajectory traj;
    traj.times = make_grid(start, end, h);
    traj.values.reserve(traj.times.size());
    double n = n0;
    traj.values.push_back(n);
    for (std::size_t i = 1; i < traj.times.size(); ++i) {
        n = advance(f, method, n, traj.times[i] - traj.times[i - 1]);
        if (!std::isfinite(n) || n < 0.0) {
            throw StepTooLarge("integration left the admissible range at t = " +
                               std::to_string(traj.times[i]) + "; reduce the step");
        }
        traj.values.push_back(n);
    }
    return traj;
}

void validate_config(const IntegratorConfig& cfg) {
    if (!(std::isfinite(cfg.step) && cfg.step > 0.0)) {
        throw InvalidParams("integrator step must be finite and > 0");
    }
}

}  // namespace

IntegratorConfig IntegratorConfig::for_params(const TopicParams& params) {
    return {params.duration / 100.0, Method::rk4};
}

Trajectory integrate_rise(const TopicParams& params, const IntegratorConfig& cfg) {
    params.validate();
    validate_config(cfg);
    if (!(params.lateness < params.duration)) throw InvalidParams("tau must be < lambda");
    const double p = params.background_rate;
    const Logistic rise{p + params.intensity, p * params.inverse_level};
    return integrate(rise, cfg.method, params.lateness, params.duration, params.initial_density,
                     cfg.step);
}

Trajectory integrate_decay(const TopicParams& params, double boundary_value,
                           const IntegratorConfig& cfg, double span) {
    params.validate();
    validate_config(cfg);
    if (!(std::isfinite(boundary_value) && boundary_value > 0.0)) {
        throw InvalidParams("boundary value must be finite and > 0");
    }
    if (!(std::isfinite(span) && span > 0.0)) throw InvalidParams("decay span must be > 0");
    const double p = params.background_rate;
    const Logistic decay{p, p * params.inverse_level};
    return integrate(decay, cfg.method, params.duration, params.duration + span, boundary_value,
                     cfg.step);
}

Trajectory integrate_flow(const TopicParams& params, const IntegratorConfig& cfg, double horizon) {
    if (!(horizon > params.duration)) throw InvalidParams("horizon must exceed lambda");
    Trajectory traj = integrate_rise(params, cfg);
    const Trajectory tail =
        integrate_decay(params, traj.values.back(), cfg, horizon - params.duration);
    traj.times.insert(traj.times.end(), tail.times.begin() + 1, tail.times.end());
    traj.values.insert(traj.values.end(), tail.values.begin() + 1, tail.values.end());
    return traj;
}

void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "time,value\n";
    for (std::size_t i = 0; i < traj.size(); ++i) {
        out << detail::format_double(traj.times[i]) << ',' << detail::format_double(traj.values[i])
            << '\n';
    }
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace themeflow
