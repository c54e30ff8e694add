#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "fragility/core/error.hpp"

namespace fragility::gm {

/// The six descriptors of one synthetic motion.
struct GroundMotionParams {
    double arias_intensity;     ///< s*g
    double effective_duration;  ///< D5-95, s
    double t_mid;               ///< time at 45% of Arias intensity, s
    double omega_mid;           ///< predominant angular frequency at t_mid, rad/s
    double omega_slope;         ///< rate of change of the predominant frequency, rad/s^2
    double bandwidth_zeta;      ///< filter damping ratio

    static GroundMotionParams from_hz(double arias, double d595, double tmid, double f_mid_hz,
                                      double f_slope_hz, double zeta) {
        return {arias, d595, tmid, 2.0 * std::numbers::pi * f_mid_hz, 2.0 * std::numbers::pi * f_slope_hz, zeta};
    }

    /// Throws ConfigError naming the first violated bound.
    void validate() const {
        auto fail = [](const std::string& what) { throw ConfigError("ground-motion parameters: " + what); };
        if (!(arias_intensity > 0.0) || !std::isfinite(arias_intensity)) fail("arias_intensity must be > 0");
        if (!(effective_duration >= 5.0 && effective_duration <= 45.0)) fail("effective_duration outside [5, 45] s");
        if (!(t_mid >= 0.5 && t_mid <= 40.0)) fail("t_mid outside [0.5, 40] s");
        if (!(omega_mid > 0.0) || !std::isfinite(omega_mid)) fail("omega_mid must be > 0");
        if (!std::isfinite(omega_slope)) fail("omega_slope must be finite");
        if (!(bandwidth_zeta >= 0.02 && bandwidth_zeta < 1.0)) fail("bandwidth_zeta outside [0.02, 1)");
    }
};

}  // namespace fragility::gm
