#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/roots.hpp>

#include "fragility/core/error.hpp"

namespace fragility::gm {

/// Raised when (D5-95, t_mid) cannot be reproduced by the Gamma-shaped envelope.
struct InfeasibleDescriptorError : ConfigError {
    explicit InfeasibleDescriptorError(const std::string& what) : ConfigError(what) {}
};

/// Coefficients of q(t) = alpha1 * t^(alpha2-1) * exp(-alpha3 t) and the motion length.
struct ModulatorCoeffs {
    double alpha1;          ///< g * s^(1-alpha2)
    double alpha2;          ///< dimensionless, >= 1
    double alpha3;          ///< 1/s
    double total_duration;  ///< s

    /// alpha2 >= 1 keeps q bounded at t = 0; alpha1 = 0 (silent motion) is allowed.
    void validate() const {
        if (!(alpha1 >= 0.0) || !std::isfinite(alpha1)) throw ConfigError("modulator: alpha1 must be >= 0");
        if (!(alpha2 >= 1.0) || !std::isfinite(alpha2)) throw ConfigError("modulator: alpha2 must be >= 1");
        if (!(alpha3 > 0.0) || !std::isfinite(alpha3)) throw ConfigError("modulator: alpha3 must be > 0");
        if (!(total_duration > 0.0) || !std::isfinite(total_duration))
            throw ConfigError("modulator: total duration must be > 0");
    }

    /// Shape k of the normalized energy c(t) = P(k, theta t).
    double energy_shape() const noexcept { return 2.0 * alpha2 - 1.0; }
    /// Rate theta of the normalized energy c(t) = P(k, theta t).
    double energy_rate() const noexcept { return 2.0 * alpha3; }
};

inline double modulating_q(double t, const ModulatorCoeffs& c) {
    if (t <= 0.0) return c.alpha2 == 1.0 ? c.alpha1 : 0.0;
    if (c.alpha2 == 1.0) return c.alpha1 * std::exp(-c.alpha3 * t);
    return c.alpha1 * std::exp((c.alpha2 - 1.0) * std::log(t) - c.alpha3 * t);
}

namespace detail {

/// (x95 - x5) / x45 for the unit-rate Gamma(k) distribution; depends on k only.
inline double gamma_spread_ratio(double k) {
    using boost::math::gamma_p_inv;
    return (gamma_p_inv(k, 0.95) - gamma_p_inv(k, 0.05)) / gamma_p_inv(k, 0.45);
}

inline constexpr double kMinShape = 1.0;   // alpha2 = 1
inline constexpr double kMaxShape = 1e4;

}  // namespace detail

/// Inverts (Arias intensity, D5-95, t_mid) into envelope coefficients.
///
/// With k = 2*alpha2 - 1 and theta = 2*alpha3 the normalized cumulative energy
/// of q^2 is the regularized incomplete gamma P(k, theta t), so the ratio
/// D5-95 / t_mid fixes k; t_mid then fixes theta and the Arias intensity
/// (pi/2 * integral of q^2, q in g) fixes alpha1. The motion lasts until 99% of
/// the energy has arrived, plus 2 s.
inline ModulatorCoeffs solve_modulator(double ia, double d595, double tmid) {
    using boost::math::gamma_p_inv;
    if (!(ia > 0.0) || !(d595 > 0.0) || !(tmid > 0.0))
        throw ConfigError("solve_modulator: ia, d595 and tmid must be positive");

    const double target = d595 / tmid;
    const double r_lo = detail::gamma_spread_ratio(detail::kMaxShape);
    const double r_hi = detail::gamma_spread_ratio(detail::kMinShape);
    if (!(target <= r_hi && target >= r_lo)) {
        std::ostringstream msg;
        msg << "solve_modulator: D5-95/t_mid = " << target << " outside the achievable range [" << r_lo << ", "
            << r_hi << "]";
        throw InfeasibleDescriptorError(msg.str());
    }

    double k = detail::kMinShape;
    if (target < r_hi) {
        auto f = [&](double log_k) { return detail::gamma_spread_ratio(std::exp(log_k)) - target; };
        std::uintmax_t iters = 200;
        const auto bracket = boost::math::tools::toms748_solve(
            f, std::log(detail::kMinShape), std::log(detail::kMaxShape), r_hi - target, r_lo - target,
            boost::math::tools::eps_tolerance<double>(50), iters);
        k = std::exp(0.5 * (bracket.first + bracket.second));
        const double residual = detail::gamma_spread_ratio(k) - target;
        if (iters >= 200 || !(std::abs(residual) <= 1e-9 * target)) {
            std::ostringstream msg;
            msg << "solve_modulator: shape root-find did not converge (residual " << residual << ")";
            throw NumericalError(msg.str());
        }
    }

    const double theta = gamma_p_inv(k, 0.45) / tmid;
    ModulatorCoeffs c{};
    c.alpha2 = 0.5 * (k + 1.0);
    c.alpha3 = 0.5 * theta;
    // alpha1^2 * Gamma(k) / theta^k = (2/pi) * ia
    c.alpha1 = std::exp(0.5 * (std::log(2.0 * ia / std::numbers::pi) + k * std::log(theta) - std::lgamma(k)));
    c.total_duration = gamma_p_inv(k, 0.99) / theta + 2.0;
    return c;
}

}  // namespace fragility::gm
