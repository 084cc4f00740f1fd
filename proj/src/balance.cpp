#include "themeflow/balance.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "numfmt.hpp"
#include "themeflow/errors.hpp"

namespace themeflow {
namespace {

constexpr int kMaxCorrections = 8;
constexpr int kMaxNudges = 4096;

double sum_in_order(const std::vector<double>& values) {
    double total = 0.0;
    for (double v : values) total += v;
    return total;
}

// Adjusts `slot` until sum(values) + background == capacity: first by the
// residual, then one ulp at a time.
bool settle_slot(const std::vector<double>& values, const double& background, double capacity,
                 double& slot) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    for (int i = 0; i < kMaxCorrections + kMaxNudges; ++i) {
        const double total = sum_in_order(values) + background;
        if (total == capacity) return true;
        double next = i < kMaxCorrections ? slot + (capacity - total) : slot;
        if (next == slot) next = std::nextafter(slot, total < capacity ? inf : -inf);
        slot = std::max(0.0, next);
    }
    return false;
}

// Settles the primary slot. A tie in round-half-to-even can make the sum skip
// the capacity while only that slot moves; moving a finer-grained slot by a
// single ulp shifts the tie, after which the primary slot is settled again.
void settle(std::vector<double>& values, double& background, double capacity,
            const std::vector<double*>& slots) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (slots.empty()) throw std::logic_error("balance allocation has nothing to settle");
    double& primary = *slots.front();
    const double start = primary;
    if (settle_slot(values, background, capacity, primary)) return;
    for (std::size_t i = 1; i < slots.size(); ++i) {
        double& other = *slots[i];
        const double saved = other;
        for (double direction : {inf, -inf}) {
            for (int n = 0; n < 4; ++n) {
                other = std::max(0.0, std::nextafter(other, direction));
                primary = start;
                if (settle_slot(values, background, capacity, primary)) return;
            }
            other = saved;
        }
    }
    primary = start;
    throw std::logic_error("balance allocation could not be settled exactly");
}

// Positive flows, largest first.
std::vector<double*> flows_by_size(std::vector<double>& flows) {
    std::vector<double*> out;
    for (double& f : flows) {
        if (f > 0.0) out.push_back(&f);
    }
    std::stable_sort(out.begin(), out.end(), [](double* a, double* b) { return *a > *b; });
    return out;
}

}  // namespace

void BalanceScenario::validate() const {
    if (!(std::isfinite(capacity) && capacity > 0.0)) throw InvalidParams("capacity must be > 0");
    if (!(std::isfinite(horizon) && horizon > 0.0)) throw InvalidParams("horizon must be > 0");
    if (!(std::isfinite(step) && step > 0.0)) throw InvalidParams("step must be > 0");
    for (std::size_t i = 0; i < topics.size(); ++i) {
        if (!(std::isfinite(topics[i].start) && topics[i].start >= 0.0)) {
            throw InvalidParams("topic " + std::to_string(i) + ": start must be >= 0");
        }
        FlowCurve{topics[i].params};
    }
}

std::vector<std::string> BalanceScenario::warnings() const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < topics.size(); ++i) {
        if (topics[i].start + topics[i].params.duration > horizon) {
            out.push_back("topic " + std::to_string(i) +
                          " is still active at the horizon and will be truncated");
        }
    }
    return out;
}

double topic_demand(const FlowCurve& curve, double start, double t) {
    const double local = t - start;
    if (!(local > 0.0)) return 0.0;
    return std::max(0.0, curve(local) - curve.background_level());
}

BalanceTrace simulate(const BalanceScenario& scenario) {
    scenario.validate();
    std::vector<FlowCurve> curves;
    curves.reserve(scenario.topics.size());
    for (const auto& topic : scenario.topics) curves.emplace_back(topic.params);

    BalanceTrace trace;
    trace.capacity = scenario.capacity;
    const auto steps =
        static_cast<std::size_t>(std::ceil(scenario.horizon / scenario.step - 1e-9));
    for (std::size_t k = 0; k < steps; ++k) trace.times.push_back(static_cast<double>(k) * scenario.step);
    trace.times.push_back(scenario.horizon);

    const std::size_t m = curves.size();
    const double cap = scenario.capacity;
    trace.per_topic.assign(m, std::vector<double>(trace.times.size(), 0.0));
    trace.background.resize(trace.times.size());
    trace.contention.resize(trace.times.size());

    std::vector<double> flows(m);
    for (std::size_t k = 0; k < trace.times.size(); ++k) {
        const double t = trace.times[k];
        for (std::size_t i = 0; i < m; ++i) {
            flows[i] = topic_demand(curves[i], scenario.topics[i].start, t);
        }
        const double demand = sum_in_order(flows);
        double background = 0.0;
        if (demand <= cap) {
            background = cap - demand;
            std::vector<double*> slots{&background};
            for (double* f : flows_by_size(flows)) slots.push_back(f);
            settle(flows, background, cap, slots);
        } else {
            trace.contention[k] = true;
            const double factor = cap / demand;
            for (double& f : flows) f *= factor;
            settle(flows, background, cap, flows_by_size(flows));
        }
        for (std::size_t i = 0; i < m; ++i) trace.per_topic[i][k] = flows[i];
        trace.background[k] = background;
    }
    return trace;
}

double step_total(const BalanceTrace& trace, std::size_t step) {
    double total = 0.0;
    for (const auto& row : trace.per_topic) total += row[step];
    return total + trace.background[step];
}

double balance_integral(const BalanceTrace& trace) {
    const auto& t = trace.times;
    if (t.size() < 2) return 0.0;
    // Integrates the excess over N so that a balanced trace gives exactly 0.
    double excess = 0.0;
    for (std::size_t k = 1; k < t.size(); ++k) {
        const double left = step_total(trace, k - 1) - trace.capacity;
        const double right = step_total(trace, k) - trace.capacity;
        excess += 0.5 * (t[k] - t[k - 1]) * (left + right);
    }
    return excess / (trace.capacity * (t.back() - t.front()));
}

void write_trace_csv(const BalanceTrace& trace, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "time,background";
    for (std::size_t i = 0; i < trace.per_topic.size(); ++i) out << ",topic_" << i;
    out << '\n';
    for (std::size_t k = 0; k < trace.times.size(); ++k) {
        out << detail::format_double(trace.times[k]) << ','
            << detail::format_double(trace.background[k]);
        for (const auto& row : trace.per_topic) out << ',' << detail::format_double(row[k]);
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace themeflow
