#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "fragility/core/error.hpp"
#include "fragility/core/normal.hpp"
#include "fragility/im/demand_point.hpp"
#include "fragility/nonparam/fragility_curve.hpp"

namespace fragility::nonparam {

/// 2-D point; for fragility work the order is (demand, intensity).
using Point2 = std::array<double, 2>;

struct Bandwidth1D {
    double h;

    void validate() const {
        if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("bandwidth: h must be > 0");
    }
};

/// Symmetric bandwidth matrix [[h11, h12], [h12, h22]].
struct Bandwidth2D {
    double h11;
    double h12;
    double h22;

    double det() const noexcept { return h11 * h22 - h12 * h12; }
    double trace() const noexcept { return h11 + h22; }

    std::array<double, 2> eigenvalues() const noexcept {
        const double m = 0.5 * (h11 + h22);
        const double r = std::hypot(0.5 * (h11 - h22), h12);
        return {m - r, m + r};
    }

    bool is_spd() const noexcept {
        return std::isfinite(h11) && std::isfinite(h12) && std::isfinite(h22) && h11 > 0.0 && h22 > 0.0 &&
               det() > 0.0 && eigenvalues()[0] > 0.0;
    }

    void validate() const {
        if (!is_spd()) throw ConfigError("bandwidth matrix must be symmetric positive definite");
    }

    Bandwidth2D scaled(double c) const noexcept { return {c * h11, c * h12, c * h22}; }
};

inline double kde_1d(std::span<const double> samples, Bandwidth1D bw, double x) {
    bw.validate();
    if (samples.empty()) throw DataError("kde_1d: no samples");
    double s = 0.0;
    for (double xi : samples) {
        const double z = (x - xi) / bw.h;
        s += std::exp(-0.5 * z * z);
    }
    return s / (static_cast<double>(samples.size()) * bw.h * std::sqrt(2.0 * std::numbers::pi));
}

inline double kde_2d(std::span<const Point2> samples, const Bandwidth2D& H, const Point2& p) {
    H.validate();
    if (samples.empty()) throw DataError("kde_2d: no samples");
    const double det = H.det();
    const double i11 = H.h22 / det, i12 = -H.h12 / det, i22 = H.h11 / det;
    double s = 0.0;
    for (const auto& q : samples) {
        const double v1 = p[0] - q[0];
        const double v2 = p[1] - q[1];
        s += std::exp(-0.5 * (i11 * v1 * v1 + 2.0 * i12 * v1 * v2 + i22 * v2 * v2));
    }
    return s / (2.0 * std::numbers::pi * static_cast<double>(samples.size()) * std::sqrt(det));
}

/// Integral over delta in [delta_o, inf) of the (unnormalized) Gaussian kernel
/// exp(-v'H^-1 v / 2), v = (delta - sample_demand, a - sample_im), by
/// conditioning on the intensity coordinate.
inline double kernel_exceedance_term(const Point2& sample, double a, double delta_o, const Bandwidth2D& H) {
    const double var_c = H.h11 - H.h12 * H.h12 / H.h22;
    if (!(H.h22 > 0.0) || !(var_c > 0.0)) throw ConfigError("kernel_exceedance_term: bandwidth matrix is not SPD");
    const double da = a - sample[1];
    const double mu_c = sample[0] + H.h12 / H.h22 * da;
    const double sd_c = std::sqrt(var_c);
    return std::exp(-da * da / (2.0 * H.h22)) * std::sqrt(2.0 * std::numbers::pi) * sd_c *
           normal_cdf((mu_c - delta_o) / sd_c);
}

inline constexpr double kKdeUnderflow = 1e-300;

/// Kernel fragility estimate: the joint-density exceedance integral divided
/// by the marginal IM density at each grid point. In log scale (default) the
/// data, grid and threshold are mapped to (ln delta, ln IM) first and the
/// bandwidths are read in those units.
inline FragilityCurve kde_fragility(std::span<const DemandPoint> data, double delta_o, std::span<const double> grid,
                                    Bandwidth1D h_im, const Bandwidth2D& H, bool log_scale = true,
                                    im::ImKind kind = im::ImKind::PGA) {
    if (data.empty()) throw DataError("kde_fragility: no records");
    validate_grid(grid);
    h_im.validate();
    H.validate();
    if (!(delta_o > 0.0)) throw ConfigError("kde_fragility: threshold must be > 0");

    std::vector<Point2> pts;
    pts.reserve(data.size());
    for (const auto& d : data) {
        if (log_scale) {
            if (!(d.im > 0.0) || !(d.delta > 0.0))
                throw DataError("kde_fragility: log scale needs positive IM and drift");
            pts.push_back({std::log(d.delta), std::log(d.im)});
        } else {
            pts.push_back({d.delta, d.im});
        }
    }
    const double threshold = log_scale ? std::log(delta_o) : delta_o;
    const double front = h_im.h / std::sqrt(2.0 * std::numbers::pi * H.det());

    FragilityCurve out;
    out.im_grid.assign(grid.begin(), grid.end());
    out.method = "kde";
    out.im_kind = kind;
    out.threshold = delta_o;
    for (double g : grid) {
        const double a = log_scale ? std::log(g) : g;
        double num = 0.0, den = 0.0;
        for (const auto& p : pts) {
            num += kernel_exceedance_term(p, a, threshold, H);
            const double z = (a - p[1]) / h_im.h;
            den += std::exp(-0.5 * z * z);
        }
        if (!(den > kKdeUnderflow)) {
            out.probability.emplace_back(std::nullopt);
            continue;
        }
        out.probability.emplace_back(std::clamp(front * num / den, 0.0, 1.0));
    }
    return out;
}

}  // namespace fragility::nonparam
