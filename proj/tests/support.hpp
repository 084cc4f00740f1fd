#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "themeflow/model.hpp"

namespace themeflow::test {

inline double rel_err(double actual, double expected) {
    return std::abs(actual - expected) / std::max(std::abs(expected), 1e-300);
}

/// Generator of valid TopicParams with n0 below saturation and tau < lambda.
/// Rates and durations stay in a range where lambda / 2000 is a fine rk4 step.
class ParamGen {
public:
    explicit ParamGen(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<>(lo, hi)(rng_); }
    double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }

    TopicParams operator()() {
        TopicParams p;
        p.background_rate = log_uniform(0.05, 2.0);
        p.intensity = uniform(0.05, 3.0);
        p.inverse_level = log_uniform(1e-3, 1.0);
        p.duration = uniform(5.0, 40.0);
        p.lateness = uniform(0.0, 0.25 * p.duration);
        p.initial_density = saturation_level(p) * log_uniform(1e-3, 0.9);
        return p;
    }

private:
    std::mt19937_64 rng_;
};

inline std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& name)
        : path_(std::filesystem::temp_directory_path() / ("themeflow_" + name)) {
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace themeflow::test
