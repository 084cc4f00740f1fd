#pragma once

#include <filesystem>
#include <vector>

#include "themeflow/model.hpp"

namespace themeflow {

enum class Method { euler, rk4 };

struct IntegratorConfig {
    double step = 0.01;
    Method method = Method::rk4;

    /// Step of lambda / 100 with rk4.
    static IntegratorConfig for_params(const TopicParams& params);
};

/// Sampled n(t). Times strictly increase; values are finite and >= 0.
struct Trajectory {
    std::vector<double> times;
    std::vector<double> values;

    std::size_t size() const noexcept { return times.size(); }
};

/// Integrates the active-topic logistic from (tau, n0) to lambda. The delay
/// is a pure translation, so the integration runs in shifted time and the
/// result is reported on absolute times. The last node is lambda exactly.
Trajectory integrate_rise(const TopicParams& params, const IntegratorConfig& cfg);

/// Integrates the background logistic from (lambda, boundary_value) over
/// [lambda, lambda + span].
Trajectory integrate_decay(const TopicParams& params, double boundary_value,
                           const IntegratorConfig& cfg, double span);

/// Rise then decay up to absolute time `horizon`, handing off at lambda.
/// lambda appears once in the returned grid.
Trajectory integrate_flow(const TopicParams& params, const IntegratorConfig& cfg, double horizon);

/// Two-column `time,value` CSV, shortest round-trip formatting.
void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path);

}  // namespace themeflow
