#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "fragility/core/error.hpp"
#include "fragility/core/nelder_mead.hpp"
#include "fragility/core/random_stream.hpp"
#include "fragility/gm/params.hpp"

namespace fragility::gm {

enum class MarginalFamily { Lognormal, Beta, Gamma, TwoSidedExponential };

/// Target description of one marginal: family, support and the first two moments.
/// Supports of Lognormal and Gamma are (0, inf) and the bounds are ignored.
struct MarginalSpec {
    MarginalFamily family;
    double lower;
    double upper;
    double mean;
    double std;
};

/// A marginal whose shape parameters have been moment-matched to a MarginalSpec.
///
/// The two-sided exponential is an asymmetric Laplace density with its mode at
/// zero, e^{x/b_left} for x < 0 and e^{-x/b_right} for x >= 0, truncated to
/// [lower, upper]; its two scales are found numerically.
class Marginal {
public:
    static Marginal fit(const std::string& name, const MarginalSpec& spec) {
        Marginal m;
        m.name_ = name;
        m.spec_ = spec;
        auto fail = [&](const std::string& why) {
            throw ConfigError("moment matching failed for '" + name + "': " + why);
        };
        if (!(spec.std > 0.0) || !std::isfinite(spec.mean) || !std::isfinite(spec.std)) fail("need finite mean and std > 0");

        switch (spec.family) {
        case MarginalFamily::Lognormal: {
            if (!(spec.mean > 0.0)) fail("lognormal mean must be > 0");
            const double cv = spec.std / spec.mean;
            m.p2_ = std::sqrt(std::log1p(cv * cv));
            m.p1_ = std::log(spec.mean) - 0.5 * m.p2_ * m.p2_;
            break;
        }
        case MarginalFamily::Beta: {
            const double width = spec.upper - spec.lower;
            if (!(width > 0.0)) fail("empty support");
            const double mu = (spec.mean - spec.lower) / width;
            const double var = spec.std * spec.std / (width * width);
            if (!(mu > 0.0 && mu < 1.0)) fail("mean outside the support");
            const double common = mu * (1.0 - mu) / var - 1.0;
            if (!(common > 0.0)) fail("variance too large for a Beta on this support");
            m.p1_ = mu * common;
            m.p2_ = (1.0 - mu) * common;
            break;
        }
        case MarginalFamily::Gamma: {
            if (!(spec.mean > 0.0)) fail("gamma mean must be > 0");
            m.p1_ = (spec.mean / spec.std) * (spec.mean / spec.std);
            m.p2_ = spec.std * spec.std / spec.mean;
            break;
        }
        case MarginalFamily::TwoSidedExponential: {
            if (!(spec.lower < 0.0 && spec.upper > 0.0)) fail("support must contain the mode 0");
            if (!(spec.mean > spec.lower && spec.mean < spec.upper)) fail("mean outside the support");
            m.fit_two_sided(fail);
            break;
        }
        }
        return m;
    }

    const std::string& name() const noexcept { return name_; }
    const MarginalSpec& spec() const noexcept { return spec_; }

    /// Fitted shape parameters:
    /// Lognormal (mu, sigma) of ln X; Beta (a, b); Gamma (shape, scale);
    /// TwoSidedExponential (b_left, b_right).
    std::pair<double, double> shape() const noexcept { return {p1_, p2_}; }

    double quantile(double u) const {
        switch (spec_.family) {
        case MarginalFamily::Lognormal:
            return std::exp(p1_ + p2_ * standard_normal_quantile(u));
        case MarginalFamily::Beta:
            return spec_.lower + (spec_.upper - spec_.lower) * boost::math::ibeta_inv(p1_, p2_, u);
        case MarginalFamily::Gamma:
            return p2_ * boost::math::gamma_p_inv(p1_, u);
        case MarginalFamily::TwoSidedExponential: {
            const auto [ml, mr] = two_sided_masses(p1_, p2_);
            const double target = u * (ml + mr);
            if (target < ml) return p1_ * std::log(std::exp(spec_.lower / p1_) + target / p1_);
            return -p2_ * std::log1p(-(target - ml) / p2_);
        }
        }
        return std::numeric_limits<double>::quiet_NaN();
    }

    /// Closed-form moments of the fitted distribution.
    std::pair<double, double> moments() const {
        switch (spec_.family) {
        case MarginalFamily::Lognormal: {
            const double mean = std::exp(p1_ + 0.5 * p2_ * p2_);
            return {mean, mean * std::sqrt(std::expm1(p2_ * p2_))};
        }
        case MarginalFamily::Beta: {
            const double w = spec_.upper - spec_.lower;
            const double s = p1_ + p2_;
            return {spec_.lower + w * p1_ / s, w * std::sqrt(p1_ * p2_ / (s * s * (s + 1.0)))};
        }
        case MarginalFamily::Gamma:
            return {p1_ * p2_, std::sqrt(p1_) * p2_};
        case MarginalFamily::TwoSidedExponential:
            return two_sided_moments(p1_, p2_);
        }
        return {};
    }

private:
    std::pair<double, double> two_sided_masses(double bl, double br) const {
        return {bl * -std::expm1(spec_.lower / bl), br * -std::expm1(-spec_.upper / br)};
    }

    std::pair<double, double> two_sided_moments(double bl, double br) const {
        const double lo = spec_.lower;
        const double hi = spec_.upper;
        const double el = std::exp(lo / bl);
        const double er = std::exp(-hi / br);
        const auto [ml, mr] = two_sided_masses(bl, br);
        const double m1l = -bl * bl - bl * lo * el + bl * bl * el;
        const double m2l = 2.0 * bl * bl * bl - el * (bl * lo * lo - 2.0 * bl * bl * lo + 2.0 * bl * bl * bl);
        const double m1r = br * br - br * hi * er - br * br * er;
        const double m2r = 2.0 * br * br * br - er * (br * hi * hi + 2.0 * br * br * hi + 2.0 * br * br * br);
        const double z = ml + mr;
        const double mean = (m1l + m1r) / z;
        const double second = (m2l + m2r) / z;
        return {mean, std::sqrt(std::max(second - mean * mean, 0.0))};
    }

    template <class Fail>
    void fit_two_sided(Fail&& fail) {
        const double mu = spec_.mean;
        const double sd = spec_.std;
        auto residual = [&](double lbl, double lbr) {
            const auto [m, s] = two_sided_moments(std::exp(lbl), std::exp(lbr));
            return std::array<double, 2>{(m - mu) / sd, (s - sd) / sd};
        };
        auto objective = [&](const std::vector<double>& x) {
            const auto r = residual(x[0], x[1]);
            return r[0] * r[0] + r[1] * r[1];
        };
        SimplexOptions opt;
        opt.f_tol_abs = 1e-20;
        opt.x_tol = 1e-10;
        opt.initial_step = 0.5;
        auto res = nelder_mead(objective, {std::log(sd), std::log(sd)}, opt);
        double x0 = res.x[0];
        double x1 = res.x[1];
        // Newton polish with a finite-difference Jacobian.
        for (int it = 0; it < 20; ++it) {
            const auto r = residual(x0, x1);
            if (std::hypot(r[0], r[1]) < 1e-14) break;
            const double h = 1e-7;
            const auto r0 = residual(x0 + h, x1);
            const auto r1 = residual(x0, x1 + h);
            const double j00 = (r0[0] - r[0]) / h, j10 = (r0[1] - r[1]) / h;
            const double j01 = (r1[0] - r[0]) / h, j11 = (r1[1] - r[1]) / h;
            const double det = j00 * j11 - j01 * j10;
            if (std::abs(det) < 1e-300) break;
            x0 -= (j11 * r[0] - j01 * r[1]) / det;
            x1 -= (-j10 * r[0] + j00 * r[1]) / det;
        }
        const auto r = residual(x0, x1);
        if (!(std::hypot(r[0], r[1]) < 1e-9)) fail("no two-sided exponential reproduces the mean/std on this support");
        p1_ = std::exp(x0);
        p2_ = std::exp(x1);
    }

    std::string name_;
    MarginalSpec spec_{};
    double p1_ = 0.0;
    double p2_ = 0.0;
};

inline constexpr std::size_t kGmParamCount = 6;

/// Marginals of (I_a, D5-95, t_mid, omega_mid/2pi, omega'/2pi, zeta_f), with
/// frequencies in Hz, plus an optional Spearman rank-correlation matrix that
/// switches sampling to a Gaussian copula.
class GMParamDistributions {
public:
    using Matrix = Eigen::Matrix<double, 6, 6>;

    GMParamDistributions(const std::array<MarginalSpec, kGmParamCount>& specs,
                         std::optional<Matrix> rank_correlation = std::nullopt) {
        static const std::array<const char*, kGmParamCount> names{
            "arias_intensity", "effective_duration", "t_mid", "omega_mid_hz", "omega_slope_hz", "bandwidth_zeta"};
        for (std::size_t i = 0; i < kGmParamCount; ++i) marginals_[i] = Marginal::fit(names[i], specs[i]);
        if (rank_correlation) factor_correlation(*rank_correlation);
    }

    /// Published statistics for strong strike-slip and reverse records.
    static std::array<MarginalSpec, kGmParamCount> default_specs() {
        constexpr double inf = std::numeric_limits<double>::infinity();
        return {{
            {MarginalFamily::Lognormal, 0.0, inf, 0.0468, 0.164},
            {MarginalFamily::Beta, 5.0, 45.0, 17.3, 9.31},
            {MarginalFamily::Beta, 0.5, 40.0, 12.4, 7.44},
            {MarginalFamily::Gamma, 0.0, inf, 5.87, 3.11},
            {MarginalFamily::TwoSidedExponential, -2.0, 0.5, -0.089, 0.185},
            {MarginalFamily::Beta, 0.02, 1.0, 0.213, 0.143},
        }};
    }

    static GMParamDistributions defaults() { return GMParamDistributions(default_specs()); }

    const Marginal& marginal(std::size_t i) const { return marginals_.at(i); }
    bool correlated() const noexcept { return copula_factor_.has_value(); }
    const std::optional<Matrix>& copula_factor() const noexcept { return copula_factor_; }

private:
    void factor_correlation(const Matrix& rank) {
        auto fail = [](const std::string& why) { throw ConfigError("rank-correlation matrix: " + why); };
        for (int i = 0; i < 6; ++i) {
            if (std::abs(rank(i, i) - 1.0) > 1e-12) fail("diagonal must be 1");
            for (int j = 0; j < 6; ++j) {
                if (std::abs(rank(i, j) - rank(j, i)) > 1e-12) fail("not symmetric");
                if (!(std::abs(rank(i, j)) <= 1.0)) fail("entries must lie in [-1, 1]");
            }
        }
        Eigen::SelfAdjointEigenSolver<Matrix> rank_eig(rank);
        if (rank_eig.eigenvalues().minCoeff() < -1e-10) fail("not positive semi-definite");

        // Spearman -> Pearson correlation of the underlying Gaussian.
        Matrix pearson = rank.unaryExpr([](double r) { return 2.0 * std::sin(std::numbers::pi * r / 6.0); });
        Eigen::SelfAdjointEigenSolver<Matrix> eig(pearson);
        if (eig.eigenvalues().minCoeff() < -1e-10) fail("implied Gaussian correlation is not positive semi-definite");
        const auto sqrt_vals = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
        copula_factor_ = eig.eigenvectors() * sqrt_vals.asDiagonal();
    }

    std::array<Marginal, kGmParamCount> marginals_;
    std::optional<Matrix> copula_factor_;
};

/// Draws one parameter set. Each marginal is sampled by inversion, from
/// independent uniforms or, with a correlation matrix, through a Gaussian copula.
inline GroundMotionParams sample_gm_params(const GMParamDistributions& dists, const RandomStream& stream) {
    auto eng = stream.engine();
    std::array<double, kGmParamCount> u{};
    if (!dists.correlated()) {
        for (double& v : u) v = open_uniform(eng);
    } else {
        Eigen::Matrix<double, 6, 1> z;
        for (int i = 0; i < 6; ++i) z(i) = standard_normal(eng);
        const Eigen::Matrix<double, 6, 1> x = (*dists.copula_factor()) * z;
        for (int i = 0; i < 6; ++i) {
            const double p = 0.5 * std::erfc(-x(i) / std::numbers::sqrt2);
            u[static_cast<std::size_t>(i)] = std::clamp(p, 0x1.0p-60, 1.0 - 0x1.0p-53);
        }
    }
    std::array<double, kGmParamCount> v{};
    for (std::size_t i = 0; i < kGmParamCount; ++i) v[i] = dists.marginal(i).quantile(u[i]);
    return GroundMotionParams::from_hz(v[0], v[1], v[2], v[3], v[4], v[5]);
}

}  // namespace fragility::gm
