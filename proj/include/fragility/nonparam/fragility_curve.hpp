#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fragility/core/error.hpp"
#include "fragility/im/demand_point.hpp"
#include "fragility/im/intensity.hpp"

namespace fragility {

/// Exceedance probability on an IM grid. Undefined points are std::nullopt.
struct FragilityCurve {
    std::vector<double> im_grid;                     ///< g, strictly increasing, positive
    std::vector<std::optional<double>> probability;  ///< in [0, 1] where defined
    std::vector<std::size_t> support;                ///< per-point bin counts (binned estimator only)
    std::string method;
    im::ImKind im_kind = im::ImKind::PGA;
    double threshold = 0.0;

    std::size_t size() const noexcept { return im_grid.size(); }

    void validate() const {
        if (probability.size() != im_grid.size()) throw DataError("fragility curve: grid/probability size mismatch");
        for (std::size_t i = 0; i < im_grid.size(); ++i) {
            if (!(im_grid[i] > 0.0)) throw DataError("fragility curve: grid must be positive");
            if (i > 0 && !(im_grid[i] > im_grid[i - 1])) throw DataError("fragility curve: grid must increase");
            if (probability[i] && !(*probability[i] >= 0.0 && *probability[i] <= 1.0))
                throw DataError("fragility curve: probability outside [0, 1]");
        }
    }
};

inline void validate_grid(std::span<const double> grid) {
    if (grid.empty()) throw ConfigError("IM grid is empty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0) || !std::isfinite(grid[i])) throw ConfigError("IM grid values must be positive");
        if (i > 0 && !(grid[i] > grid[i - 1])) throw ConfigError("IM grid must be strictly increasing");
    }
}

inline std::vector<double> log_spaced(double lo, double hi, std::size_t count) {
    if (!(lo > 0.0 && hi > lo) || count < 2) throw ConfigError("log_spaced: need 0 < lo < hi and count >= 2");
    std::vector<double> g(count);
    const double a = std::log(lo);
    const double b = std::log(hi);
    for (std::size_t i = 0; i < count; ++i)
        g[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
    g.front() = lo;
    g.back() = hi;
    return g;
}

/// Linear-interpolated empirical quantile of an already sorted sample.
inline double sorted_quantile(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw DataError("quantile of an empty sample");
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

/// Default grid: `count` log-spaced points between the 2nd and 98th
/// percentiles of the observed IM.
inline std::vector<double> default_im_grid(std::span<const DemandPoint> data, std::size_t count = 60) {
    std::vector<double> ims;
    ims.reserve(data.size());
    for (const auto& d : data)
        if (d.im > 0.0) ims.push_back(d.im);
    if (ims.size() < 2) throw DataError("default_im_grid: need at least two positive IM values");
    std::sort(ims.begin(), ims.end());
    return log_spaced(sorted_quantile(ims, 0.02), sorted_quantile(ims, 0.98), count);
}

}  // namespace fragility
