#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "themeflow/model.hpp"

namespace themeflow {

struct ScheduledTopic {
    double start = 0.0;  ///< absolute time at which the topic's local clock reads 0
    TopicParams params;
};

/// Fixed information-space capacity shared by a background flow and the
/// scheduled topics.
struct BalanceScenario {
    double capacity = 1.0;  ///< N, publications per time unit
    double horizon = 1.0;   ///< T
    double step = 1.0;
    std::vector<ScheduledTopic> topics;

    void validate() const;
    /// Topics whose active window runs past the horizon; they are truncated.
    std::vector<std::string> warnings() const;
};

struct BalanceTrace {
    double capacity = 0.0;
    std::vector<double> times;  ///< 0, step, ..., horizon (last step may be short)
    std::vector<std::vector<double>> per_topic;  ///< one row per topic, aligned with times
    std::vector<double> background;
    std::vector<bool> contention;  ///< demand exceeded capacity at this step
};

/// Thematic demand of one topic at absolute time t: its composite flow on the
/// local clock minus the background floor 1/q, never below zero, and zero
/// before the topic starts.
double topic_demand(const FlowCurve& curve, double start, double t);

/// Allocates capacity step by step. Demands are granted in full while their
/// sum fits; otherwise each is scaled by N / sum and the background gets
/// nothing. Background is whatever remains, so that
/// (topic_0 + topic_1 + ...) + background == N holds exactly in floating
/// point at every step.
BalanceTrace simulate(const BalanceScenario& scenario);

/// Sum of the flows in the canonical order used by the conservation check.
double step_total(const BalanceTrace& trace, std::size_t step);

/// Trapezoidal integral of all flows over [0, T] divided by N T, minus one.
double balance_integral(const BalanceTrace& trace);

/// Wide CSV: time, background, topic_0, topic_1, ...
void write_trace_csv(const BalanceTrace& trace, const std::filesystem::path& path);

}  // namespace themeflow
