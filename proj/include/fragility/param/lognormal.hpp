#pragma once

#include <cmath>
#include <span>
#include <string>

#include "fragility/core/error.hpp"
#include "fragility/core/normal.hpp"
#include "fragility/im/intensity.hpp"
#include "fragility/nonparam/fragility_curve.hpp"

namespace fragility::param {

/// Smallest log-standard deviation; a zero-dispersion fit becomes a step at alpha.
inline constexpr double kMinBeta = 1e-12;

struct LognormalCurve {
    double alpha;  ///< median IM, g
    double beta;   ///< log-standard deviation
    im::ImKind im_kind = im::ImKind::PGA;
    double threshold = 0.0;
};

inline double lognormal_eval(const LognormalCurve& c, double im) {
    if (!(im > 0.0)) return 0.0;
    return normal_cdf((std::log(im) - std::log(c.alpha)) / c.beta);
}

inline FragilityCurve to_curve(const LognormalCurve& c, std::span<const double> grid, std::string method) {
    validate_grid(grid);
    FragilityCurve out;
    out.im_grid.assign(grid.begin(), grid.end());
    for (double a : grid) out.probability.emplace_back(lognormal_eval(c, a));
    out.method = std::move(method);
    out.im_kind = c.im_kind;
    out.threshold = c.threshold;
    return out;
}

}  // namespace fragility::param
