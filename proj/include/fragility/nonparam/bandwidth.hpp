#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "fragility/core/error.hpp"
#include "fragility/core/nelder_mead.hpp"
#include "fragility/im/demand_point.hpp"
#include "fragility/nonparam/kde.hpp"

namespace fragility::nonparam {

inline Bandwidth1D bandwidth_normal_reference(std::span<const double> x) {
    const std::size_t n = x.size();
    if (n < 2) throw ConfigError("bandwidth: need at least 2 samples");
    double m = 0.0;
    for (double v : x) m += v;
    m /= static_cast<double>(n);
    double s2 = 0.0;
    for (double v : x) s2 += (v - m) * (v - m);
    s2 /= static_cast<double>(n - 1);
    if (!(s2 > 0.0)) throw ConfigError("bandwidth: samples have zero variance");
    return {1.06 * std::sqrt(s2) * std::pow(static_cast<double>(n), -0.2)};
}

/// Sample covariance as a bandwidth triple (h11, h12, h22); unbiased.
inline Bandwidth2D sample_covariance(std::span<const Point2> x) {
    const std::size_t n = x.size();
    if (n < 2) throw ConfigError("bandwidth: need at least 2 samples");
    double m0 = 0.0, m1 = 0.0;
    for (const auto& p : x) {
        m0 += p[0];
        m1 += p[1];
    }
    m0 /= static_cast<double>(n);
    m1 /= static_cast<double>(n);
    double c00 = 0.0, c01 = 0.0, c11 = 0.0;
    for (const auto& p : x) {
        c00 += (p[0] - m0) * (p[0] - m0);
        c01 += (p[0] - m0) * (p[1] - m1);
        c11 += (p[1] - m1) * (p[1] - m1);
    }
    const double d = static_cast<double>(n - 1);
    return {c00 / d, c01 / d, c11 / d};
}

inline Bandwidth2D bandwidth_normal_reference(std::span<const Point2> x) {
    const auto s = sample_covariance(x);
    if (!s.is_spd()) throw ConfigError("bandwidth: sample covariance is singular");
    return s.scaled(std::pow(static_cast<double>(x.size()), -1.0 / 3.0));
}

namespace detail {

/// Least-squares cross-validation score for a Gaussian-kernel 2-D KDE:
/// integral of f^2 minus twice the mean leave-one-out density. The 2H kernel
/// term is exp(-q/4) and the H kernel term its square, q = v'H^-1 v.
inline double lscv_score(std::span<const Point2> x, const Bandwidth2D& H) {
    const std::size_t n = x.size();
    const double det = H.det();
    const double i11 = H.h22 / det, i12 = -H.h12 / det, i22 = H.h11 / det;
    double s2h = 0.0, sh = 0.0;  // off-diagonal pair sums (each pair once)
    for (std::size_t i = 0; i + 1 < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v1 = x[i][0] - x[j][0];
            const double v2 = x[i][1] - x[j][1];
            const double q = i11 * v1 * v1 + 2.0 * i12 * v1 * v2 + i22 * v2 * v2;
            const double e = std::exp(-0.25 * q);
            s2h += e;
            sh += e * e;
        }
    }
    const double nn = static_cast<double>(n);
    const double c = 1.0 / (2.0 * std::numbers::pi * std::sqrt(det));  // phi_H(0)
    const double int_f2 = (nn * 0.5 * c + 2.0 * s2h * 0.5 * c) / (nn * nn);
    const double loo = 2.0 * (2.0 * sh * c) / (nn * (nn - 1.0));
    return int_f2 - loo;
}

inline Bandwidth2D from_cholesky(const std::vector<double>& p) {
    // H = L L^T, L = [[e^p0, 0], [p1, e^p2]]
    const double l11 = std::exp(p[0]), l21 = p[1], l22 = std::exp(p[2]);
    return {l11 * l11, l11 * l21, l21 * l21 + l22 * l22};
}

}  // namespace detail

inline double lscv_objective(std::span<const Point2> x, const Bandwidth2D& H) {
    H.validate();
    if (x.size() < 2) throw ConfigError("lscv: need at least 2 samples");
    return detail::lscv_score(x, H);
}

struct LscvResult {
    Bandwidth2D H;
    double objective = 0.0;
    bool fallback = false;  ///< optimizer failed; normal-reference H returned
};

/// LSCV-selected full bandwidth matrix: simplex search over the Cholesky
/// factor, started at the normal-reference matrix.
inline LscvResult bandwidth_lscv_2d(std::span<const Point2> x) {
    if (x.size() < 50) throw ConfigError("lscv: need at least 50 samples");
    const auto ref = bandwidth_normal_reference(x);
    const double l11 = std::sqrt(ref.h11);
    const double l21 = ref.h12 / l11;
    const double l22 = std::sqrt(ref.h22 - l21 * l21);
    const double ref_score = detail::lscv_score(x, ref);

    auto f = [&](const std::vector<double>& p) {
        const auto H = detail::from_cholesky(p);
        if (!H.is_spd()) return std::numeric_limits<double>::infinity();
        return detail::lscv_score(x, H);
    };
    SimplexOptions opt;
    opt.f_tol_abs = 0.0;
    opt.f_tol_rel = 1e-8;
    opt.x_tol = 1e-8;
    opt.initial_step = 0.2;
    opt.max_evaluations = 4000;
    const auto res = nelder_mead(f, {std::log(l11), l21, std::log(l22)}, opt);

    LscvResult out;
    const auto H = detail::from_cholesky(res.x);
    // Degenerate minima (H collapsing onto duplicated points or blowing up)
    // are rejected in favour of the reference matrix.
    const bool bad = !H.is_spd() || !std::isfinite(res.value) || H.eigenvalues()[0] < 1e-12 * ref.trace() ||
                     !(res.value <= ref_score);
    if (bad) {
        out.H = ref;
        out.objective = ref_score;
        out.fallback = true;
    } else {
        out.H = H;
        out.objective = res.value;
    }
    return out;
}

/// How the IM marginal bandwidth relates to the joint matrix.
enum class MarginalBandwidth {
    FromJoint,    ///< h_im = sqrt(H22): numerator and denominator share one kernel
    Independent,  ///< h_im from the 1-D normal-reference rule
};

enum class BandwidthMode { NormalReference, Lscv };

struct FragilityBandwidths {
    Bandwidth1D h_im;
    Bandwidth2D H;
    bool fallback = false;
};

/// Bandwidths for kde_fragility, estimated in the coordinates the estimator
/// will use: (ln delta, ln IM) in log scale, otherwise (delta, IM).
inline FragilityBandwidths fragility_bandwidths(std::span<const DemandPoint> data, bool log_scale = true,
                                                BandwidthMode mode = BandwidthMode::NormalReference,
                                                MarginalBandwidth marginal = MarginalBandwidth::FromJoint) {
    std::vector<Point2> pts;
    std::vector<double> ims;
    pts.reserve(data.size());
    ims.reserve(data.size());
    for (const auto& d : data) {
        if (log_scale) {
            if (!(d.im > 0.0) || !(d.delta > 0.0))
                throw DataError("bandwidth: log scale needs positive IM and drift");
            pts.push_back({std::log(d.delta), std::log(d.im)});
        } else {
            pts.push_back({d.delta, d.im});
        }
        ims.push_back(pts.back()[1]);
    }
    FragilityBandwidths out;
    if (mode == BandwidthMode::Lscv) {
        const auto r = bandwidth_lscv_2d(pts);
        out.H = r.H;
        out.fallback = r.fallback;
    } else {
        out.H = bandwidth_normal_reference(pts);
    }
    out.h_im = marginal == MarginalBandwidth::FromJoint ? Bandwidth1D{std::sqrt(out.H.h22)}
                                                        : bandwidth_normal_reference(ims);
    return out;
}

}  // namespace fragility::nonparam
