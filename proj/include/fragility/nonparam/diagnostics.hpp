#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "fragility/core/error.hpp"
#include "fragility/core/normal.hpp"
#include "fragility/im/demand_point.hpp"
#include "fragility/nonparam/bmcs.hpp"
#include "fragility/param/linear_demand.hpp"

namespace fragility::nonparam {

struct ConditionalHistogram {
    double im_level = 0.0;
    std::vector<double> edges;         ///< n_bins + 1, in ln(delta)
    std::vector<std::size_t> counts;   ///< n_bins
    std::vector<double> log_drifts;    ///< bin sample, ln of scaled drift
    double normal_mean = 0.0;          ///< A ln(im_level) + B
    double normal_std = 0.0;           ///< zeta

    std::size_t support() const noexcept { return log_drifts.size(); }
    double normal_density(double v) const { return normal_pdf((v - normal_mean) / normal_std) / normal_std; }
};

/// Histogram of log scaled drifts in the bMCS bin at im_level, together with
/// the normal density implied by the log-linear demand model fitted to all
/// records.
inline ConditionalHistogram conditional_histogram(std::span<const DemandPoint> data, double im_level,
                                                  const BinSpec& spec, std::size_t n_bins) {
    spec.validate();
    if (n_bins < 1) throw ConfigError("conditional_histogram: need at least one cell");
    if (!(im_level > 0.0)) throw ConfigError("conditional_histogram: IM level must be > 0");
    ConditionalHistogram out;
    out.im_level = im_level;
    const double lo = (1.0 - spec.half_width) * im_level;
    const double hi = (1.0 + spec.half_width) * im_level;
    for (const auto& d : data) {
        if (d.im < lo || d.im > hi) continue;
        const double s = scale_drift(d.delta, d.im, im_level);
        if (!(s > 0.0)) throw DataError("conditional_histogram: drift must be > 0");
        out.log_drifts.push_back(std::log(s));
    }
    if (out.log_drifts.size() < spec.min_support || out.log_drifts.empty())
        throw DataError("conditional_histogram: insufficient support in the bin");

    const auto fit = param::fit_linear_demand(data);
    out.normal_mean = fit.mean_log_demand(im_level);
    out.normal_std = fit.zeta_res;
    if (!(out.normal_std > 0.0)) throw DataError("conditional_histogram: demand model has zero dispersion");

    const auto [mn, mx] = std::minmax_element(out.log_drifts.begin(), out.log_drifts.end());
    double a = *mn, b = *mx;
    if (a == b) {
        a -= 0.5;
        b += 0.5;
    }
    out.edges.resize(n_bins + 1);
    for (std::size_t k = 0; k <= n_bins; ++k)
        out.edges[k] = a + (b - a) * static_cast<double>(k) / static_cast<double>(n_bins);
    out.counts.assign(n_bins, 0);
    const double w = (b - a) / static_cast<double>(n_bins);
    for (double v : out.log_drifts) {
        auto k = static_cast<std::size_t>((v - a) / w);
        ++out.counts[std::min(k, n_bins - 1)];
    }
    return out;
}

}  // namespace fragility::nonparam
