#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>

#include "fragility/core/error.hpp"
#include "fragility/im/demand_point.hpp"
#include "fragility/param/lognormal.hpp"

namespace fragility::param {

/// ln(delta) = slope * ln(IM) + intercept + zeta_res * Z
struct DemandModelFit {
    double slope = 0.0;      ///< A
    double intercept = 0.0;  ///< B
    double zeta_res = 0.0;   ///< residual log-std, SSE / (N - 2)
    double r2 = 0.0;
    std::size_t count = 0;
    double sse = 0.0;

    double mean_log_demand(double im) const { return slope * std::log(im) + intercept; }
};

namespace detail {

inline void check_positive(std::span<const DemandPoint> data, const char* who) {
    for (const auto& d : data)
        if (!(d.im > 0.0) || !(d.delta > 0.0) || !std::isfinite(d.im) || !std::isfinite(d.delta))
            throw DataError(std::string(who) + ": IM and drift must be positive and finite");
}

/// Ordinary least squares of y on x with centered sums.
struct LineFit {
    double slope, intercept, sse, sst;
};

template <class XY>
LineFit least_squares(std::size_t n, XY&& xy) {
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto [x, y] = xy(i);
        mx += x;
        my += y;
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto [x, y] = xy(i);
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    LineFit f{};
    if (!(sxx > 0.0)) throw DataError("linear demand fit: ln(IM) has zero variance");
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto [x, y] = xy(i);
        const double e = y - f.slope * x - f.intercept;
        sse += e * e;
    }
    f.sse = sse;
    f.sst = syy;
    return f;
}

inline double r_squared(double sse, double sst) {
    if (!(sst > 0.0)) return sse > 0.0 ? 0.0 : 1.0;
    return std::clamp(1.0 - sse / sst, 0.0, 1.0);
}

}  // namespace detail

inline DemandModelFit fit_linear_demand(std::span<const DemandPoint> data) {
    if (data.size() < 3) throw DataError("fit_linear_demand: need at least 3 records");
    detail::check_positive(data, "fit_linear_demand");
    const auto f = detail::least_squares(data.size(), [&](std::size_t i) {
        return std::pair{std::log(data[i].im), std::log(data[i].delta)};
    });
    DemandModelFit out;
    out.slope = f.slope;
    out.intercept = f.intercept;
    out.sse = f.sse;
    out.count = data.size();
    out.zeta_res = std::sqrt(f.sse / static_cast<double>(data.size() - 2));
    out.r2 = detail::r_squared(f.sse, f.sst);
    return out;
}

/// Lognormal fragility implied by the demand model: alpha = exp((ln d0 - B)/A),
/// beta = zeta / A.
inline LognormalCurve lr_to_fragility(const DemandModelFit& fit, double delta_o, im::ImKind kind = im::ImKind::PGA) {
    if (!(fit.slope > 0.0))
        throw NumericalError("lr_to_fragility: slope must be > 0 for a fragility increasing in IM");
    if (!(delta_o > 0.0)) throw ConfigError("lr_to_fragility: threshold must be > 0");
    LognormalCurve c;
    c.alpha = std::exp((std::log(delta_o) - fit.intercept) / fit.slope);
    c.beta = std::max(fit.zeta_res / fit.slope, kMinBeta);
    c.im_kind = kind;
    c.threshold = delta_o;
    return c;
}

}  // namespace fragility::param
