#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "fragility/core/error.hpp"
#include "fragility/core/normal.hpp"
#include "fragility/im/demand_point.hpp"
#include "fragility/param/linear_demand.hpp"
#include "fragility/param/lognormal.hpp"

namespace fragility::param {

enum class SegmentStatus {
    Segmented,          ///< genuine two-segment fit
    EffectivelyLinear,  ///< break adds nothing over a single line
    FallbackLinear,     ///< too few points around every candidate break
};

struct SegmentParams {
    double slope = 0.0;
    double intercept = 0.0;
    double zeta_res = 0.0;
    double r2 = 0.0;
    std::size_t count = 0;
};

/// Continuous two-segment line in (ln IM, ln delta) with a break at `break_im`.
struct SegmentedFit {
    double break_im = 0.0;  ///< g
    std::array<SegmentParams, 2> segments{};
    double sse = 0.0;
    double linear_sse = 0.0;
    SegmentStatus status = SegmentStatus::Segmented;

    const SegmentParams& segment_for(double im) const { return std::log(im) < std::log(break_im) ? segments[0] : segments[1]; }
};

inline constexpr std::size_t kMinSegmentPoints = 10;
inline constexpr std::size_t kBreakGridPoints = 50;

namespace detail {

struct HingeFit {
    double b0, b1, b2;  ///< y = b0 + b1 x + b2 (x - psi)_+
    double sse;
};

/// Least-squares hinge fit for a fixed break (3x3 normal equations, centered).
inline HingeFit hinge_fit(std::span<const double> x, std::span<const double> y, double psi) {
    const std::size_t n = x.size();
    double m[3] = {0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) {
        m[0] += x[i];
        m[1] += std::max(x[i] - psi, 0.0);
        m[2] += y[i];
    }
    for (double& v : m) v /= static_cast<double>(n);
    double a11 = 0, a12 = 0, a22 = 0, r1 = 0, r2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double u = x[i] - m[0];
        const double w = std::max(x[i] - psi, 0.0) - m[1];
        const double t = y[i] - m[2];
        a11 += u * u;
        a12 += u * w;
        a22 += w * w;
        r1 += u * t;
        r2 += w * t;
    }
    const double det = a11 * a22 - a12 * a12;
    HingeFit f{};
    if (!(det > 1e-300 * std::max(1.0, a11 * a22))) {
        f.sse = std::numeric_limits<double>::infinity();
        return f;
    }
    f.b1 = (r1 * a22 - r2 * a12) / det;
    f.b2 = (a11 * r2 - a12 * r1) / det;
    f.b0 = m[2] - f.b1 * m[0] - f.b2 * m[1];
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = y[i] - f.b0 - f.b1 * x[i] - f.b2 * std::max(x[i] - psi, 0.0);
        sse += e * e;
    }
    f.sse = sse;
    return f;
}

}  // namespace detail

/// Continuous bilinear demand model. The break is scanned over a 50-point
/// grid between the 10% and 90% quantiles of ln IM, then refined by golden
/// section between the neighbours of the best grid point. Each segment
/// reports its own residual log-std with an (n_seg - 2) denominator.
inline SegmentedFit fit_segmented(std::span<const DemandPoint> data) {
    if (data.size() < 20) throw DataError("fit_segmented: need at least 20 records");
    detail::check_positive(data, "fit_segmented");

    std::vector<double> x(data.size()), y(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        x[i] = std::log(data[i].im);
        y[i] = std::log(data[i].delta);
    }
    std::vector<double> xs(x);
    std::sort(xs.begin(), xs.end());

    auto points_each_side_ok = [&](double psi) {
        const auto below = static_cast<std::size_t>(std::lower_bound(xs.begin(), xs.end(), psi) - xs.begin());
        return below >= kMinSegmentPoints && xs.size() - below >= kMinSegmentPoints;
    };
    auto cost = [&](double psi) {
        return points_each_side_ok(psi) ? detail::hinge_fit(x, y, psi).sse : std::numeric_limits<double>::infinity();
    };

    const auto linear = detail::least_squares(x.size(), [&](std::size_t i) { return std::pair{x[i], y[i]}; });

    const double lo = sorted_quantile(xs, 0.10);
    const double hi = sorted_quantile(xs, 0.90);
    std::vector<double> grid(kBreakGridPoints);
    for (std::size_t j = 0; j < kBreakGridPoints; ++j)
        grid[j] = lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(kBreakGridPoints - 1);

    std::size_t best = 0;
    double best_cost = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const double c = cost(grid[j]);
        if (c < best_cost) {
            best_cost = c;
            best = j;
        }
    }

    auto summarize_segment = [&](bool upper, double psi, double slope, double intercept) {
        SegmentParams s;
        s.slope = slope;
        s.intercept = intercept;
        double sse = 0.0, my = 0.0;
        std::size_t cnt = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if ((x[i] >= psi) != upper) continue;
            ++cnt;
            my += y[i];
        }
        if (cnt == 0) return s;
        my /= static_cast<double>(cnt);
        double sst = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if ((x[i] >= psi) != upper) continue;
            const double e = y[i] - slope * x[i] - intercept;
            sse += e * e;
            sst += (y[i] - my) * (y[i] - my);
        }
        s.count = cnt;
        s.zeta_res = cnt > 2 ? std::sqrt(sse / static_cast<double>(cnt - 2)) : 0.0;
        s.r2 = detail::r_squared(sse, sst);
        return s;
    };

    SegmentedFit out;
    out.linear_sse = linear.sse;
    if (!std::isfinite(best_cost)) {
        // No admissible break: single line reported for both segments.
        const double psi = sorted_quantile(xs, 0.5);
        out.status = SegmentStatus::FallbackLinear;
        out.break_im = std::exp(psi);
        out.sse = linear.sse;
        const double zeta = std::sqrt(linear.sse / static_cast<double>(x.size() - 2));
        SegmentParams s{linear.slope, linear.intercept, zeta, detail::r_squared(linear.sse, linear.sst), x.size()};
        out.segments = {s, s};
        return out;
    }

    // Golden-section refinement on [grid[best-1], grid[best+1]].
    double a = grid[best > 0 ? best - 1 : 0];
    double b = grid[std::min(best + 1, grid.size() - 1)];
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = cost(c), fd = cost(d);
    for (int it = 0; it < 200 && (b - a) > 1e-12 * std::max(1.0, std::abs(a)); ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = cost(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = cost(d);
        }
    }
    double psi = 0.5 * (a + b);
    double psi_cost = cost(psi);
    if (!(psi_cost <= best_cost)) {
        psi = grid[best];
        psi_cost = best_cost;
    }

    const auto h = detail::hinge_fit(x, y, psi);
    out.break_im = std::exp(psi);
    out.sse = h.sse;
    out.segments[0] = summarize_segment(false, psi, h.b1, h.b0);
    out.segments[1] = summarize_segment(true, psi, h.b1 + h.b2, h.b0 - h.b2 * psi);
    const double improvement = linear.sse - h.sse;
    const double scale = std::max(linear.sse, 1e-14 * std::max(linear.sst, 1e-300));
    out.status = improvement <= 1e-8 * scale ? SegmentStatus::EffectivelyLinear : SegmentStatus::Segmented;
    return out;
}

/// Exceedance probability using the segment that contains ln(im).
inline double segmented_to_fragility(const SegmentedFit& fit, double delta_o, double im) {
    if (!(im > 0.0)) return 0.0;
    const auto& s = fit.segment_for(im);
    const double mean = s.slope * std::log(im) + s.intercept;
    const double zeta = std::max(s.zeta_res, kMinBeta);
    return normal_cdf((mean - std::log(delta_o)) / zeta);
}

inline FragilityCurve segmented_curve(const SegmentedFit& fit, double delta_o, std::span<const double> grid,
                                      im::ImKind kind) {
    validate_grid(grid);
    FragilityCurve out;
    out.im_grid.assign(grid.begin(), grid.end());
    for (double a : grid) out.probability.emplace_back(segmented_to_fragility(fit, delta_o, a));
    out.method = "segmented";
    out.im_kind = kind;
    out.threshold = delta_o;
    return out;
}

}  // namespace fragility::param
