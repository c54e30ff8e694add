#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

namespace fragility {

struct SimplexOptions {
    double f_tol_abs = 1e-9;   ///< spread of objective values across the simplex
    double f_tol_rel = 0.0;    ///< same, relative to |f_best|; whichever is larger applies
    double x_tol = 1e-7;       ///< max coordinate distance from the best vertex
    double initial_step = 0.1;
    std::size_t max_evaluations = 20000;
};

struct SimplexResult {
    std::vector<double> x;
    double value = std::numeric_limits<double>::infinity();
    std::size_t evaluations = 0;
    bool converged = false;
};

/// Derivative-free Nelder-Mead minimization with the standard coefficients
/// (reflection 1, expansion 2, contraction 1/2, shrink 1/2).
/// Non-finite objective values are treated as +infinity.
template <class Objective>
SimplexResult nelder_mead(Objective&& objective, std::vector<double> start,
                          const SimplexOptions& opt = {}) {
    const std::size_t n = start.size();
    SimplexResult out;
    auto eval = [&](const std::vector<double>& x) {
        ++out.evaluations;
        const double v = objective(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };

    std::vector<std::vector<double>> pts(n + 1, start);
    for (std::size_t i = 0; i < n; ++i) {
        const double step = start[i] != 0.0 ? opt.initial_step * std::abs(start[i]) : opt.initial_step;
        pts[i + 1][i] += std::max(step, 1e-4);
    }
    std::vector<double> f(n + 1);
    for (std::size_t i = 0; i <= n; ++i) f[i] = eval(pts[i]);

    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n), trial(n), trial2(n);

    auto combine = [&](double t, const std::vector<double>& worst, std::vector<double>& dst) {
        for (std::size_t j = 0; j < n; ++j) dst[j] = centroid[j] + t * (worst[j] - centroid[j]);
    };

    while (out.evaluations < opt.max_evaluations) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return f[a] < f[b]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second = order[n - 1];

        double x_spread = 0.0;
        for (std::size_t i = 0; i <= n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                x_spread = std::max(x_spread, std::abs(pts[i][j] - pts[best][j]));
        const double f_spread = f[worst] - f[best];
        const double f_tol = std::max(opt.f_tol_abs, opt.f_tol_rel * std::abs(f[best]));
        if (std::isfinite(f_spread) && f_spread <= f_tol && x_spread <= opt.x_tol) {
            out.converged = true;
            break;
        }

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == worst) continue;
            for (std::size_t j = 0; j < n; ++j) centroid[j] += pts[i][j] / static_cast<double>(n);
        }

        combine(-1.0, pts[worst], trial);
        const double fr = eval(trial);
        if (fr < f[best]) {
            combine(-2.0, pts[worst], trial2);
            const double fe = eval(trial2);
            if (fe < fr) {
                pts[worst] = trial2;
                f[worst] = fe;
            } else {
                pts[worst] = trial;
                f[worst] = fr;
            }
            continue;
        }
        if (fr < f[second]) {
            pts[worst] = trial;
            f[worst] = fr;
            continue;
        }
        // contraction, outside if the reflection improved on the worst point
        const bool outside = fr < f[worst];
        combine(outside ? -0.5 : 0.5, pts[worst], trial2);
        const double fc = eval(trial2);
        if (fc < (outside ? fr : f[worst])) {
            pts[worst] = trial2;
            f[worst] = fc;
            continue;
        }
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == best) continue;
            for (std::size_t j = 0; j < n; ++j) pts[i][j] = pts[best][j] + 0.5 * (pts[i][j] - pts[best][j]);
            f[i] = eval(pts[i]);
        }
    }

    const auto it = std::min_element(f.begin(), f.end());
    out.x = pts[static_cast<std::size_t>(it - f.begin())];
    out.value = *it;
    return out;
}

}  // namespace fragility
