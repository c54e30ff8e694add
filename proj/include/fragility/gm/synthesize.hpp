#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "fragility/core/error.hpp"
#include "fragility/core/random_stream.hpp"
#include "fragility/gm/accelerogram.hpp"
#include "fragility/gm/filter.hpp"
#include "fragility/gm/modulator.hpp"
#include "fragility/gm/params.hpp"

namespace fragility::gm {

inline constexpr double kDefaultDt = 0.01;
inline constexpr double kMaxDt = 0.02;

struct Synthesis {
    Accelerogram motion;
    std::vector<double> unit_process;  ///< normalized filtered noise before modulation
    ModulatorCoeffs coeffs;
    bool frequency_clipped = false;
};

/// Modulated, filtered white noise on the grid t_k = k*dt, k = 0..n-1 with
/// n = ceil(T/dt). Standard normal impulses U_i sit at t_i = i*dt (i >= 1) and
/// the filter frequency of impulse i is frozen at its arrival time. At every
/// t_k the filtered sum is divided by sqrt(sum_{j<=k} h^2(t_k - t_j)), which
/// gives the pre-modulation process unit variance.
///
/// Each impulse response is a damped sinusoid, so it is advanced by one
/// complex rotation per step instead of re-evaluating exp and sin. Impulses
/// whose envelope has decayed below 1e-18 are retired from the active window.
inline Synthesis synthesize_detailed(const ModulatorCoeffs& coeffs, const GroundMotionParams& params,
                                     const RandomStream& stream, double dt = kDefaultDt, std::string label = {}) {
    coeffs.validate();
    if (!(dt > 0.0 && dt <= kMaxDt)) throw ConfigError("synthesize: dt must lie in (0, 0.02] s");
    const double zeta = params.bandwidth_zeta;
    if (!(zeta > 0.0 && zeta < 1.0)) throw ConfigError("synthesize: bandwidth_zeta must lie in (0, 1)");

    const auto n = static_cast<std::size_t>(std::ceil(coeffs.total_duration / dt));
    const double root = std::sqrt(1.0 - zeta * zeta);

    auto eng = stream.engine();
    std::vector<double> u(n, 0.0), amp(n, 0.0), zr(n, 1.0), zi(n, 0.0), wr(n, 1.0), wi(n, 0.0), h(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) {
        const double t_i = static_cast<double>(i) * dt;
        const double w = frequency_at(t_i, params);
        u[i] = standard_normal(eng);
        amp[i] = w / root;
        const double decay = std::exp(-zeta * w * dt);
        zr[i] = decay * std::cos(w * root * dt);
        zi[i] = decay * std::sin(w * root * dt);
    }

    std::vector<double> unit(n, 0.0), acc(n, 0.0);
    std::size_t start = 1;
    for (std::size_t k = 2; k < n; ++k) {
        // advance impulses 1..k-1 by one step; impulse k has zero lag and h = 0
        for (std::size_t i = start; i < k; ++i) {
            const double r = wr[i] * zr[i] - wi[i] * zi[i];
            const double s = wr[i] * zi[i] + wi[i] * zr[i];
            wr[i] = r;
            wi[i] = s;
            h[i] = amp[i] * s;
        }
        double num[4] = {0.0, 0.0, 0.0, 0.0};
        double den[4] = {0.0, 0.0, 0.0, 0.0};
        std::size_t i = start;
        for (; i + 4 <= k; i += 4) {
            for (std::size_t l = 0; l < 4; ++l) {
                num[l] += h[i + l] * u[i + l];
                den[l] += h[i + l] * h[i + l];
            }
        }
        for (; i < k; ++i) {
            num[0] += h[i] * u[i];
            den[0] += h[i] * h[i];
        }
        const double numer = (num[0] + num[1]) + (num[2] + num[3]);
        const double denom = (den[0] + den[1]) + (den[2] + den[3]);
        unit[k] = denom > 0.0 ? numer / std::sqrt(denom) : 0.0;
        acc[k] = modulating_q(static_cast<double>(k) * dt, coeffs) * unit[k];

        while (start < k && wr[start] * wr[start] + wi[start] * wi[start] < 1e-36) ++start;
    }

    const double span = static_cast<double>(n - 1) * dt;
    return Synthesis{Accelerogram(dt, std::move(acc), std::move(label)), std::move(unit), coeffs,
                     frequency_clipped(params, span)};
}

inline Synthesis synthesize_detailed(const GroundMotionParams& params, const RandomStream& stream,
                                     double dt = kDefaultDt, std::string label = {}) {
    params.validate();
    return synthesize_detailed(solve_modulator(params.arias_intensity, params.effective_duration, params.t_mid),
                               params, stream, dt, std::move(label));
}

inline Accelerogram synthesize(const GroundMotionParams& params, const RandomStream& stream, double dt = kDefaultDt) {
    return synthesize_detailed(params, stream, dt).motion;
}

}  // namespace fragility::gm
