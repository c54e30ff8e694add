#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fragility/core/error.hpp"
#include "fragility/core/nelder_mead.hpp"
#include "fragility/core/normal.hpp"
#include "fragility/im/demand_point.hpp"
#include "fragility/param/linear_demand.hpp"
#include "fragility/param/lognormal.hpp"

namespace fragility::param {

/// beta below this marks (near-)perfect separation of failures and survivals.
inline constexpr double kSeparationBeta = 1e-4;

struct MleFit {
    LognormalCurve curve;
    double log_likelihood = 0.0;
    bool separation = false;  ///< warning, not an error
    bool converged = false;
    std::size_t evaluations = 0;
};

/// Bernoulli log-likelihood of outcomes y_i = [delta_i >= delta_o] under
/// Phi((ln IM - ln alpha) / beta).
inline double bernoulli_log_likelihood(std::span<const DemandPoint> data, double delta_o, double alpha, double beta) {
    const double la = std::log(alpha);
    double ll = 0.0;
    for (const auto& d : data) {
        const double z = (std::log(d.im) - la) / beta;
        ll += d.delta >= delta_o ? log_normal_cdf(z) : log_normal_cdf(-z);
    }
    return ll;
}

/// Maximum-likelihood lognormal fragility. Nelder-Mead on (ln alpha, ln beta),
/// started from the linear-regression fit when that is usable, otherwise from
/// alpha = median IM of failures and beta = 0.6. Records are sorted first, so
/// the result does not depend on their order.
inline MleFit fit_mle(std::span<const DemandPoint> input, double delta_o, im::ImKind kind = im::ImKind::PGA) {
    if (!(delta_o > 0.0)) throw ConfigError("fit_mle: threshold must be > 0");
    std::vector<DemandPoint> data(input.begin(), input.end());
    for (const auto& d : data)
        if (!(d.im > 0.0) || !std::isfinite(d.im) || !std::isfinite(d.delta))
            throw DataError("fit_mle: IM values must be positive and finite");
    std::sort(data.begin(), data.end(), [](const DemandPoint& a, const DemandPoint& b) {
        return a.im < b.im || (a.im == b.im && a.delta < b.delta);
    });

    std::vector<double> failure_ims;
    for (const auto& d : data)
        if (d.delta >= delta_o) failure_ims.push_back(d.im);
    if (failure_ims.empty() || failure_ims.size() == data.size())
        throw DataError("fit_mle: degenerate data, need at least one failure and one survival");

    // Complete separation: the supremum is at beta -> 0 with alpha anywhere in the
    // gap, and the likelihood is flat to machine precision well before that.
    double max_survivor = 0.0;
    for (const auto& d : data)
        if (d.delta < delta_o) max_survivor = std::max(max_survivor, d.im);
    const double min_failure = *std::min_element(failure_ims.begin(), failure_ims.end());
    if (max_survivor < min_failure) {
        MleFit out;
        out.curve.alpha = std::sqrt(max_survivor * min_failure);
        out.curve.beta = kMinBeta;
        out.curve.im_kind = kind;
        out.curve.threshold = delta_o;
        out.log_likelihood = bernoulli_log_likelihood(data, delta_o, out.curve.alpha, out.curve.beta);
        out.separation = true;
        out.converged = true;
        return out;
    }

    double alpha0 = 0.0;
    double beta0 = 0.0;
    try {
        const auto lr = lr_to_fragility(fit_linear_demand(data), delta_o, kind);
        if (std::isfinite(lr.alpha) && lr.alpha > 0.0 && lr.beta > 1e-3 && std::isfinite(lr.beta)) {
            alpha0 = lr.alpha;
            beta0 = lr.beta;
        }
    } catch (const Error&) {
    }
    if (alpha0 == 0.0) {
        std::sort(failure_ims.begin(), failure_ims.end());
        alpha0 = sorted_quantile(failure_ims, 0.5);
        beta0 = 0.6;
    }

    auto nll = [&](const std::vector<double>& x) {
        return -bernoulli_log_likelihood(data, delta_o, std::exp(x[0]), std::exp(x[1]));
    };
    SimplexOptions opt;
    opt.f_tol_abs = 1e-9;
    opt.x_tol = 1e-7;
    opt.initial_step = 0.1;
    opt.max_evaluations = 5000;
    const auto res = nelder_mead(nll, {std::log(alpha0), std::log(beta0)}, opt);

    MleFit out;
    out.curve.alpha = std::exp(res.x[0]);
    out.curve.beta = std::max(std::exp(res.x[1]), kMinBeta);
    out.curve.im_kind = kind;
    out.curve.threshold = delta_o;
    out.log_likelihood = -res.value;
    out.separation = out.curve.beta < kSeparationBeta;
    out.converged = res.converged || out.separation;
    out.evaluations = res.evaluations;
    if (!out.converged) throw NumericalError("fit_mle: simplex search did not converge");
    return out;
}

}  // namespace fragility::param
