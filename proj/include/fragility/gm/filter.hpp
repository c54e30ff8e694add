#pragma once

#include <algorithm>
#include <cmath>

#include "fragility/core/error.hpp"
#include "fragility/gm/params.hpp"

namespace fragility::gm {

/// Lowest filter frequency; the linear frequency law is clipped here.
inline constexpr double kMinFilterOmega = 0.5;  // rad/s

/// Impulse response of the filter: pseudo-acceleration of a unit SDOF
/// oscillator, zero for negative lags.
inline double filter_irf(double t_lag, double omega_f, double zeta_f) {
    if (!(zeta_f > 0.0 && zeta_f < 1.0)) throw ConfigError("filter_irf: zeta_f must lie in (0, 1)");
    if (!(omega_f > 0.0)) throw ConfigError("filter_irf: omega_f must be > 0");
    if (t_lag < 0.0) return 0.0;
    const double root = std::sqrt(1.0 - zeta_f * zeta_f);
    return omega_f / root * std::exp(-zeta_f * omega_f * t_lag) * std::sin(omega_f * root * t_lag);
}

/// Filter frequency at time tau: linear in tau through omega_mid at t_mid.
inline double frequency_at(double tau, const GroundMotionParams& p) {
    return std::max(p.omega_mid + p.omega_slope * (tau - p.t_mid), kMinFilterOmega);
}

/// True when the linear law drops below the floor somewhere on [0, duration].
inline bool frequency_clipped(const GroundMotionParams& p, double duration) {
    const double at_start = p.omega_mid + p.omega_slope * (0.0 - p.t_mid);
    const double at_end = p.omega_mid + p.omega_slope * (duration - p.t_mid);
    return std::min(at_start, at_end) < kMinFilterOmega;
}

}  // namespace fragility::gm
