#pragma once

#include <filesystem>

#include "json.hpp"
#include "themeflow/balance.hpp"
#include "themeflow/fitting.hpp"
#include "themeflow/model.hpp"
#include "themeflow/series.hpp"

namespace themeflow {

using Json = nlohmann::ordered_json;

// TopicParams is a flat object {p, D, q, lambda, tau, n0}. Missing or
// non-numeric keys raise InvalidParams.
void to_json(Json& j, const TopicParams& params);
void from_json(const Json& j, TopicParams& params);

// {params, sample_interval, horizon, noise: "none"|"poisson"|"gaussian",
//  sigma, seed}
void to_json(Json& j, const GeneratorSpec& spec);
void from_json(const Json& j, GeneratorSpec& spec);

// {capacity, horizon, step, topics: [{start, params}]}
void to_json(Json& j, const BalanceScenario& scenario);
void from_json(const Json& j, BalanceScenario& scenario);

// {params, residual_rms, converged, iterations, status, sample_interval,
//  phase_boundaries: {tau, lambda}}
void to_json(Json& j, const FitResult& result);

/// Reads and parses a JSON file; IoError if unreadable, InvalidParams if
/// malformed.
Json read_json(const std::filesystem::path& path);
void write_json(const Json& j, const std::filesystem::path& path);

}  // namespace themeflow
