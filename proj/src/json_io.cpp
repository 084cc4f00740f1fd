#include "themeflow/json_io.hpp"

#include <fstream>
#include <string>

#include "themeflow/errors.hpp"

namespace themeflow {
namespace {

double number_at(const Json& j, const char* key) {
    if (!j.is_object()) throw InvalidParams("expected a JSON object");
    const auto it = j.find(key);
    if (it == j.end()) throw InvalidParams(std::string("missing key '") + key + "'");
    if (!it->is_number()) throw InvalidParams(std::string("key '") + key + "' must be a number");
    return it->get<double>();
}

std::string noise_name(NoiseKind kind) {
    switch (kind) {
        case NoiseKind::none: return "none";
        case NoiseKind::poisson: return "poisson";
        case NoiseKind::gaussian: return "gaussian";
    }
    return "none";
}

}  // namespace

void to_json(Json& j, const TopicParams& p) {
    j = Json{{"p", p.background_rate}, {"D", p.intensity},  {"q", p.inverse_level},
             {"lambda", p.duration},   {"tau", p.lateness}, {"n0", p.initial_density}};
}

void from_json(const Json& j, TopicParams& p) {
    p.background_rate = number_at(j, "p");
    p.intensity = number_at(j, "D");
    p.inverse_level = number_at(j, "q");
    p.duration = number_at(j, "lambda");
    p.lateness = number_at(j, "tau");
    p.initial_density = number_at(j, "n0");
}

void to_json(Json& j, const GeneratorSpec& spec) {
    j = Json{{"params", spec.params},
             {"sample_interval", spec.sample_interval},
             {"horizon", spec.horizon},
             {"noise", noise_name(spec.noise)},
             {"sigma", spec.sigma},
             {"seed", spec.seed}};
}

void from_json(const Json& j, GeneratorSpec& spec) {
    if (!j.is_object() || !j.contains("params")) throw InvalidParams("missing key 'params'");
    spec.params = j.at("params").get<TopicParams>();
    spec.sample_interval = number_at(j, "sample_interval");
    spec.horizon = number_at(j, "horizon");
    const std::string noise = j.value("noise", std::string("poisson"));
    if (noise == "none") {
        spec.noise = NoiseKind::none;
    } else if (noise == "poisson") {
        spec.noise = NoiseKind::poisson;
    } else if (noise == "gaussian") {
        spec.noise = NoiseKind::gaussian;
        spec.sigma = number_at(j, "sigma");
    } else {
        throw InvalidParams("unknown noise '" + noise + "'");
    }
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_unsigned()) {
            throw InvalidParams("seed must be an unsigned integer");
        }
        spec.seed = j.at("seed").get<std::uint64_t>();
    }
}

void to_json(Json& j, const BalanceScenario& s) {
    Json topics = Json::array();
    for (const auto& topic : s.topics) topics.push_back({{"start", topic.start}, {"params", topic.params}});
    j = Json{{"capacity", s.capacity}, {"horizon", s.horizon}, {"step", s.step}, {"topics", topics}};
}

void from_json(const Json& j, BalanceScenario& s) {
    s.capacity = number_at(j, "capacity");
    s.horizon = number_at(j, "horizon");
    s.step = number_at(j, "step");
    s.topics.clear();
    if (!j.contains("topics")) return;
    if (!j.at("topics").is_array()) throw InvalidParams("'topics' must be an array");
    for (const auto& item : j.at("topics")) {
        if (!item.contains("params")) throw InvalidParams("topic entry missing 'params'");
        s.topics.push_back({number_at(item, "start"), item.at("params").get<TopicParams>()});
    }
}

void to_json(Json& j, const FitResult& r) {
    j = Json{{"params", r.params},
             {"residual_rms", r.residual_rms},
             {"converged", r.converged},
             {"iterations", r.iterations},
             {"status", r.status == FitStatus::ok ? "ok" : "degenerate"},
             {"sample_interval", r.sample_interval},
             {"phase_boundaries",
              {{"tau", r.phase_boundaries.rise_start}, {"lambda", r.phase_boundaries.topic_end}}}};
}

Json read_json(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw InvalidParams(path.string() + ": " + e.what());
    }
}

void write_json(const Json& j, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace themeflow
