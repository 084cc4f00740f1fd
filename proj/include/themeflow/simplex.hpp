#pragma once

#include <functional>
#include <span>
#include <vector>

namespace themeflow {

struct SimplexOptions {
    int max_evaluations = 5000;
    /// Stop when the spread of objective values across the simplex falls
    /// below f_tolerance * |f_best| + f_absolute and every vertex lies within
    /// x_tolerance of the best one in each coordinate.
    double f_tolerance = 1e-12;
    double f_absolute = 0.0;
    double x_tolerance = 1e-10;
    /// Edge length of the initial simplex, per coordinate.
    std::vector<double> initial_step;
};

struct SimplexResult {
    std::vector<double> x;
    double value = 0.0;
    int evaluations = 0;
    bool converged = false;
};

using Objective = std::function<double(std::span<const double>)>;

/// Nelder-Mead downhill simplex with the standard reflection (1), expansion
/// (2), contraction (1/2) and shrink (1/2) coefficients. Deterministic.
SimplexResult nelder_mead(const Objective& objective, std::vector<double> start,
                          const SimplexOptions& options);

}  // namespace themeflow
