#pragma once

#include <cmath>

namespace fragility::structure {

struct HystereticState {
    double plastic_displacement = 0.0;  ///< m
    bool yielding = false;              ///< tangent is on the post-yield branch
};

struct RestoringForce {
    double force;          ///< N
    double tangent;        ///< N/m
    HystereticState state;
    double dissipated;     ///< energy dissipated by this update, J
};

/// Bilinear kinematic-hardening spring by elastic predictor / return mapping.
///
/// Elastic slope k, post-yield slope b*k, elastic range 2*k*u_y carried by a
/// back force (b*k/(1-b)) * plastic displacement. The update starts from the
/// committed `state` with the total drift, so repeated calls inside a Newton
/// loop are path-consistent.
inline RestoringForce bilinear_restoring(const HystereticState& state, double drift, double k, double u_y, double b) {
    const double f_y = k * u_y;
    const double kin = b * k / (1.0 - b);
    const double trial = k * (drift - state.plastic_displacement);
    const double back = kin * state.plastic_displacement;
    const double xi = trial - back;
    if (std::abs(xi) <= f_y) return {trial, k, {state.plastic_displacement, false}, 0.0};

    const double sign = xi > 0.0 ? 1.0 : -1.0;
    const double gamma = (std::abs(xi) - f_y) / (k + kin);
    HystereticState next{state.plastic_displacement + sign * gamma, true};
    return {trial - k * sign * gamma, b * k, next, f_y * gamma};
}

}  // namespace fragility::structure
