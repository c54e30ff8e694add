#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "fragility/core/error.hpp"
#include "fragility/gm/accelerogram.hpp"
#include "fragility/structure/bilinear.hpp"
#include "fragility/structure/shear_frame.hpp"

namespace fragility::structure {

struct IntegrationError : NumericalError {
    IntegrationError(const std::string& what, std::size_t step) : NumericalError(what), step(step) {}
    std::size_t step;
};

struct IntegrationOptions {
    double max_substep = std::numeric_limits<double>::infinity();  ///< s
    double period_fraction = 1.0 / 20.0;  ///< dt_int <= fraction * shortest period
    double residual_tol = 1e-8;           ///< relative force residual
    int max_iterations = 50;
};

struct InitialConditions {
    std::vector<double> displacement;  ///< m, relative to ground; empty = at rest
    std::vector<double> velocity;      ///< m/s
};

/// Response sampled at the input time step.
struct ResponseHistory {
    double dt = 0.0;
    std::vector<std::vector<double>> displacement;  ///< [floor][step], m, relative to ground
    std::vector<std::vector<double>> velocity;      ///< [floor][step], m/s, relative
    std::vector<std::vector<double>> acceleration;  ///< [floor][step], g, absolute
    std::vector<double> dissipated_energy;          ///< cumulative hysteretic dissipation, J

    std::size_t steps() const { return displacement.empty() ? 0 : displacement.front().size(); }
};

namespace detail {

/// Solves a symmetric tridiagonal system in place (Thomas algorithm).
inline void solve_tridiagonal(std::vector<double> diag, std::vector<double> off, std::vector<double>& rhs) {
    const std::size_t n = diag.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double w = off[i - 1] / diag[i - 1];
        diag[i] -= w * off[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - off[i] * rhs[i + 1]) / diag[i];
}

inline double norm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

inline std::size_t substeps_for(double dt, double shortest_period, const IntegrationOptions& opt) {
    const double limit = std::min({dt, opt.period_fraction * shortest_period, opt.max_substep});
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(dt / limit - 1e-9)));
}

}  // namespace detail

/// Newmark average-acceleration (gamma = 1/2, beta = 1/4) time history of
/// M u'' + C u' + f(u) = -M 1 a_g with Rayleigh damping on the initial
/// stiffness and bilinear storeys, Newton iteration in every sub-step.
inline ResponseHistory integrate(const ShearFrameModel& model, const Accelerogram& acc,
                                 const IntegrationOptions& opt = {}, const InitialConditions& init = {}) {
    model.validate();
    constexpr double gamma = 0.5;
    constexpr double beta = 0.25;
    const std::size_t n = model.storeys();
    const auto modes = modal_analysis(model);
    const RayleighCoeffs ray = model_rayleigh(model);

    const std::size_t sub = detail::substeps_for(acc.dt(), modes.periods.back(), opt);
    const double h = acc.dt() / static_cast<double>(sub);

    const auto& mass = model.masses;
    const auto& k0 = model.stiffnesses;
    std::vector<double> u_y(n), f_y(n);
    for (std::size_t i = 0; i < n; ++i) {
        u_y[i] = model.yield_displacement(i);
        f_y[i] = k0[i] * u_y[i];
    }

    // Damping matrix C = a0 M + a1 K0 (tridiagonal).
    std::vector<double> c_diag(n), c_off(n > 1 ? n - 1 : 0);
    for (std::size_t i = 0; i < n; ++i) {
        const double kd = k0[i] + (i + 1 < n ? k0[i + 1] : 0.0);
        c_diag[i] = ray.a0 * mass[i] + ray.a1 * kd;
        if (i + 1 < n) c_off[i] = -ray.a1 * k0[i + 1];
    }
    auto damping_force = [&](const std::vector<double>& v, std::vector<double>& out) {
        for (std::size_t i = 0; i < n; ++i) {
            out[i] = c_diag[i] * v[i];
            if (i > 0) out[i] += c_off[i - 1] * v[i - 1];
            if (i + 1 < n) out[i] += c_off[i] * v[i + 1];
        }
    };

    std::vector<HystereticState> committed(n), trial_state(n);
    std::vector<double> shear(n), tangent(n), storey_dissipation(n);
    auto restoring = [&](const std::vector<double>& u, std::vector<double>& fs) {
        for (std::size_t i = 0; i < n; ++i) {
            const double drift = u[i] - (i > 0 ? u[i - 1] : 0.0);
            const auto r = bilinear_restoring(committed[i], drift, k0[i], u_y[i], model.hardening);
            shear[i] = r.force;
            tangent[i] = r.tangent;
            trial_state[i] = r.state;
            storey_dissipation[i] = r.dissipated;
        }
        for (std::size_t i = 0; i < n; ++i) fs[i] = shear[i] - (i + 1 < n ? shear[i + 1] : 0.0);
    };

    std::vector<double> u(n, 0.0), v(n, 0.0), a(n, 0.0);
    if (!init.displacement.empty()) {
        if (init.displacement.size() != n) throw ConfigError("integrate: initial displacement size mismatch");
        u = init.displacement;
    }
    if (!init.velocity.empty()) {
        if (init.velocity.size() != n) throw ConfigError("integrate: initial velocity size mismatch");
        v = init.velocity;
    }

    const auto& ag = acc.samples();
    const std::size_t steps = acc.size();
    auto ground = [&](std::size_t step, std::size_t s) {
        if (step + 1 >= steps) return ag[steps - 1];
        const double w = static_cast<double>(s) / static_cast<double>(sub);
        return (1.0 - w) * ag[step] + w * ag[step + 1];
    };

    std::vector<double> fs(n), fd(n), resid(n), rhs(n), kd(n), ko(n > 1 ? n - 1 : 0);
    {
        restoring(u, fs);
        damping_force(v, fd);
        for (std::size_t i = 0; i < n; ++i) a[i] = (-mass[i] * ag[0] * kGravity - fd[i] - fs[i]) / mass[i];
    }

    ResponseHistory out;
    out.dt = acc.dt();
    out.displacement.assign(n, std::vector<double>(steps));
    out.velocity.assign(n, std::vector<double>(steps));
    out.acceleration.assign(n, std::vector<double>(steps));
    out.dissipated_energy.assign(steps, 0.0);
    double dissipated = 0.0;
    auto record = [&](std::size_t step) {
        for (std::size_t i = 0; i < n; ++i) {
            out.displacement[i][step] = u[i];
            out.velocity[i][step] = v[i];
            out.acceleration[i][step] = a[i] / kGravity + ag[step];
        }
        out.dissipated_energy[step] = dissipated;
    };
    record(0);

    const double cm = 1.0 / (beta * h * h);
    const double cc = gamma / (beta * h);
    std::vector<double> u1(n), v1(n), a1(n);
    for (std::size_t step = 0; step + 1 < steps; ++step) {
        for (std::size_t s = 1; s <= sub; ++s) {
            const double ag1 = ground(step, s) * kGravity;
            u1 = u;
            bool converged = false;
            for (int it = 0; it <= opt.max_iterations; ++it) {
                for (std::size_t i = 0; i < n; ++i) {
                    a1[i] = cm * (u1[i] - u[i] - h * v[i]) - (1.0 / (2.0 * beta) - 1.0) * a[i];
                    v1[i] = v[i] + h * ((1.0 - gamma) * a[i] + gamma * a1[i]);
                }
                restoring(u1, fs);
                damping_force(v1, fd);
                double ref = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double p = -mass[i] * ag1;
                    resid[i] = p - mass[i] * a1[i] - fd[i] - fs[i];
                    ref = std::max({ref, std::abs(p), std::abs(mass[i] * a1[i]), std::abs(fd[i]), std::abs(fs[i])});
                }
                if (detail::norm2(resid) <= opt.residual_tol * ref * std::sqrt(static_cast<double>(n))) {
                    converged = true;
                    break;
                }
                if (it == opt.max_iterations) break;
                for (std::size_t i = 0; i < n; ++i) {
                    kd[i] = tangent[i] + (i + 1 < n ? tangent[i + 1] : 0.0) + cm * mass[i] + cc * c_diag[i];
                    if (i + 1 < n) ko[i] = -tangent[i + 1] + cc * c_off[i];
                }
                rhs = resid;
                detail::solve_tridiagonal(kd, ko, rhs);
                for (std::size_t i = 0; i < n; ++i) u1[i] += rhs[i];
            }
            if (!converged) {
                std::ostringstream msg;
                msg << "integrate: Newton iteration did not converge in " << opt.max_iterations
                    << " iterations at step " << step + 1;
                throw IntegrationError(msg.str(), step + 1);
            }
            committed = trial_state;
            for (double e : storey_dissipation) dissipated += e;
            u = u1;
            v = v1;
            a = a1;
        }
        record(step + 1);
    }
    return out;
}

/// Linear unit-mass oscillator of period T and damping zeta under the same
/// Newmark scheme (no iteration needed). Sub-stepped like `integrate`.
inline ResponseHistory linear_sdof_response(double period, double zeta, const Accelerogram& acc,
                                            const IntegrationOptions& opt = {}, double u0 = 0.0, double v0 = 0.0) {
    if (!(period > 0.0)) throw ConfigError("linear_sdof_response: period must be > 0");
    if (!(zeta >= 0.0 && zeta < 1.0)) throw ConfigError("linear_sdof_response: zeta must lie in [0, 1)");
    constexpr double gamma = 0.5;
    constexpr double beta = 0.25;
    const double w = 2.0 * std::numbers::pi / period;
    const double k = w * w;
    const double c = 2.0 * zeta * w;
    const std::size_t sub = detail::substeps_for(acc.dt(), period, opt);
    const double h = acc.dt() / static_cast<double>(sub);
    const auto& ag = acc.samples();
    const std::size_t steps = acc.size();

    const double keff = k + gamma / (beta * h) * c + 1.0 / (beta * h * h);
    double u = u0, v = v0;
    double a = -ag[0] * kGravity - c * v - k * u;

    ResponseHistory out;
    out.dt = acc.dt();
    out.displacement.assign(1, std::vector<double>(steps));
    out.velocity.assign(1, std::vector<double>(steps));
    out.acceleration.assign(1, std::vector<double>(steps));
    out.dissipated_energy.assign(steps, 0.0);
    auto record = [&](std::size_t step) {
        out.displacement[0][step] = u;
        out.velocity[0][step] = v;
        out.acceleration[0][step] = a / kGravity + ag[step];
    };
    record(0);
    for (std::size_t step = 0; step + 1 < steps; ++step) {
        for (std::size_t s = 1; s <= sub; ++s) {
            const double wgt = static_cast<double>(s) / static_cast<double>(sub);
            const double p1 = -((1.0 - wgt) * ag[step] + wgt * ag[step + 1]) * kGravity;
            const double rhs = p1 + (u / (beta * h * h) + v / (beta * h) + (1.0 / (2.0 * beta) - 1.0) * a) +
                               c * (gamma / (beta * h) * u + (gamma / beta - 1.0) * v +
                                    h * (gamma / (2.0 * beta) - 1.0) * a);
            const double u1 = rhs / keff;
            const double a1 = (u1 - u - h * v) / (beta * h * h) - (1.0 / (2.0 * beta) - 1.0) * a;
            const double v1 = v + h * ((1.0 - gamma) * a + gamma * a1);
            u = u1;
            v = v1;
            a = a1;
        }
        record(step + 1);
    }
    return out;
}

/// Largest |u_i - u_{i-1}| / H_i over all storeys and output steps.
inline double max_interstorey_drift(const ResponseHistory& resp, const std::vector<double>& heights) {
    if (heights.size() != resp.displacement.size())
        throw ConfigError("max_interstorey_drift: heights do not match the response");
    double peak = 0.0;
    for (std::size_t i = 0; i < heights.size(); ++i) {
        const auto& upper = resp.displacement[i];
        for (std::size_t t = 0; t < upper.size(); ++t) {
            const double lower = i > 0 ? resp.displacement[i - 1][t] : 0.0;
            peak = std::max(peak, std::abs(upper[t] - lower) / heights[i]);
        }
    }
    return peak;
}

}  // namespace fragility::structure
