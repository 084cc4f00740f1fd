#include "themeflow/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "themeflow/errors.hpp"

namespace themeflow {

SimplexResult nelder_mead(const Objective& objective, std::vector<double> start,
                          const SimplexOptions& options) {
    const std::size_t n = start.size();
    if (n == 0) throw InvalidParams("simplex needs at least one coordinate");
    if (!options.initial_step.empty() && options.initial_step.size() != n) {
        throw InvalidParams("initial_step must match the number of coordinates");
    }

    SimplexResult result;
    auto eval = [&](const std::vector<double>& x) {
        ++result.evaluations;
        const double f = objective(x);
        return std::isnan(f) ? HUGE_VAL : f;
    };

    std::vector<std::vector<double>> vertices(n + 1, start);
    for (std::size_t i = 0; i < n; ++i) {
        double step = options.initial_step.empty() ? 0.1 : options.initial_step[i];
        if (step == 0.0) step = 1e-4;
        vertices[i + 1][i] += step;
    }
    std::vector<double> values(n + 1);
    for (std::size_t i = 0; i <= n; ++i) values[i] = eval(vertices[i]);

    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n), trial(n), trial2(n);

    auto point_along = [&](double coeff, const std::vector<double>& worst,
                           std::vector<double>& out) {
        for (std::size_t j = 0; j < n; ++j) out[j] = centroid[j] + coeff * (worst[j] - centroid[j]);
    };

    while (result.evaluations < options.max_evaluations) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        // Stable sort keeps tie-breaking deterministic.
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second_worst = order[n - 1];

        const double spread = values[worst] - values[best];
        double size = 0.0;
        for (std::size_t i = 0; i <= n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                size = std::max(size, std::abs(vertices[i][j] - vertices[best][j]));
            }
        }
        if (spread <= options.f_tolerance * std::abs(values[best]) + options.f_absolute &&
            size <= options.x_tolerance) {
            result.converged = true;
            break;
        }

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == worst) continue;
            for (std::size_t j = 0; j < n; ++j) centroid[j] += vertices[i][j];
        }
        for (double& c : centroid) c /= static_cast<double>(n);

        point_along(-1.0, vertices[worst], trial);
        const double reflected = eval(trial);
        if (reflected < values[best]) {
            point_along(-2.0, vertices[worst], trial2);
            const double expanded = eval(trial2);
            if (expanded < reflected) {
                vertices[worst] = trial2;
                values[worst] = expanded;
            } else {
                vertices[worst] = trial;
                values[worst] = reflected;
            }
            continue;
        }
        if (reflected < values[second_worst]) {
            vertices[worst] = trial;
            values[worst] = reflected;
            continue;
        }
        const bool outside = reflected < values[worst];
        point_along(outside ? -0.5 : 0.5, vertices[worst], trial2);
        const double contracted = eval(trial2);
        if (contracted < (outside ? reflected : values[worst])) {
            vertices[worst] = trial2;
            values[worst] = contracted;
            continue;
        }
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == best) continue;
            for (std::size_t j = 0; j < n; ++j) {
                vertices[i][j] = vertices[best][j] + 0.5 * (vertices[i][j] - vertices[best][j]);
            }
            values[i] = eval(vertices[i]);
        }
    }

    const auto best_it = std::min_element(values.begin(), values.end());
    const auto best = static_cast<std::size_t>(best_it - values.begin());
    result.x = vertices[best];
    result.value = values[best];
    return result;
}

}  // namespace themeflow
