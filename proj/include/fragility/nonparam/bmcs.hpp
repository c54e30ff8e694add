#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "fragility/core/error.hpp"
#include "fragility/im/demand_point.hpp"
#include "fragility/nonparam/fragility_curve.hpp"

namespace fragility::nonparam {

/// Bin [(1 - half_width) IM_o, (1 + half_width) IM_o]; fewer than
/// `min_support` members leave the point undefined.
struct BinSpec {
    double half_width = 0.25;
    std::size_t min_support = 30;

    void validate() const {
        if (!(half_width > 0.0 && half_width < 1.0)) throw ConfigError("bin spec: half width must lie in (0, 1)");
        if (min_support < 1) throw ConfigError("bin spec: minimum support must be >= 1");
    }
};

/// Drift of a record rescaled to intensity im_o, assuming local proportionality.
inline double scale_drift(double delta, double im, double im_o) {
    if (!(im > 0.0)) throw DataError("scale_drift: IM must be > 0");
    return delta * im_o / im;
}

/// Binned Monte Carlo fragility: at each grid point, the fraction of bin
/// members whose rescaled drift reaches delta_o.
inline FragilityCurve bmcs_fragility(std::span<const DemandPoint> data, double delta_o, std::span<const double> grid,
                                     const BinSpec& spec = {}, im::ImKind kind = im::ImKind::PGA) {
    if (data.empty()) throw DataError("bmcs_fragility: no records");
    validate_grid(grid);
    spec.validate();
    FragilityCurve out;
    out.im_grid.assign(grid.begin(), grid.end());
    out.method = "bmcs";
    out.im_kind = kind;
    out.threshold = delta_o;
    out.support.reserve(grid.size());
    for (double im_o : grid) {
        const double lo = (1.0 - spec.half_width) * im_o;
        const double hi = (1.0 + spec.half_width) * im_o;
        std::size_t members = 0, failures = 0;
        for (const auto& d : data) {
            if (d.im < lo || d.im > hi) continue;
            ++members;
            if (scale_drift(d.delta, d.im, im_o) >= delta_o) ++failures;
        }
        out.support.push_back(members);
        if (members < spec.min_support)
            out.probability.emplace_back(std::nullopt);
        else
            out.probability.emplace_back(static_cast<double>(failures) / static_cast<double>(members));
    }
    return out;
}

}  // namespace fragility::nonparam
