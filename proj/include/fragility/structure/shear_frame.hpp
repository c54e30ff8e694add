#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fragility/core/error.hpp"

namespace fragility::structure {

/// Lumped-mass shear building; storey i connects floor i-1 (0 = ground) to floor i.
struct ShearFrameModel {
    std::vector<double> masses;       ///< kg, per floor
    std::vector<double> stiffnesses;  ///< N/m, elastic storey stiffness
    std::vector<double> heights;      ///< m, storey heights
    double yield_drift_ratio = 0.007;
    double hardening = 0.01;          ///< post-yield / elastic stiffness
    double damping_ratio = 0.02;      ///< on modes 1 and 2

    std::size_t storeys() const noexcept { return masses.size(); }

    double yield_displacement(std::size_t storey) const { return yield_drift_ratio * heights.at(storey); }

    void validate() const {
        auto fail = [](const std::string& why) { throw ConfigError("shear frame model: " + why); };
        const std::size_t n = masses.size();
        if (n == 0) fail("needs at least one storey");
        if (stiffnesses.size() != n || heights.size() != n) fail("masses, stiffnesses and heights differ in length");
        for (std::size_t i = 0; i < n; ++i) {
            if (!(masses[i] > 0.0)) fail("masses must be > 0");
            if (!(stiffnesses[i] > 0.0)) fail("stiffnesses must be > 0");
            if (!(heights[i] > 0.0)) fail("heights must be > 0");
        }
        if (!(hardening > 0.0 && hardening < 1.0)) fail("hardening ratio must lie in (0, 1)");
        if (!(yield_drift_ratio > 0.0 && yield_drift_ratio < 0.05)) fail("yield drift ratio must lie in (0, 0.05)");
        if (!(damping_ratio > 0.0 && damping_ratio < 0.2)) fail("damping ratio must lie in (0, 0.2)");
    }
};

inline Eigen::MatrixXd stiffness_matrix(const ShearFrameModel& m) {
    const auto n = static_cast<Eigen::Index>(m.storeys());
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double ki = m.stiffnesses[static_cast<std::size_t>(i)];
        k(i, i) += ki;
        if (i > 0) {
            k(i - 1, i - 1) += ki;
            k(i - 1, i) -= ki;
            k(i, i - 1) -= ki;
        }
    }
    return k;
}

struct ModalResult {
    std::vector<double> periods;  ///< s, descending
    std::vector<double> omegas;   ///< rad/s, ascending
    Eigen::MatrixXd shapes;       ///< mass-normalized, one column per mode
};

inline ModalResult modal_analysis(const ShearFrameModel& model) {
    model.validate();
    const Eigen::MatrixXd k = stiffness_matrix(model);
    if (Eigen::LLT<Eigen::MatrixXd>(k).info() != Eigen::Success)
        throw ConfigError("modal analysis: stiffness matrix is not positive definite");
    Eigen::VectorXd mdiag(static_cast<Eigen::Index>(model.storeys()));
    for (std::size_t i = 0; i < model.storeys(); ++i) mdiag(static_cast<Eigen::Index>(i)) = model.masses[i];
    const Eigen::MatrixXd m = mdiag.asDiagonal();

    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(k, m);
    if (solver.info() != Eigen::Success) throw NumericalError("modal analysis: eigen solver failed");
    ModalResult out;
    out.shapes = solver.eigenvectors();
    for (Eigen::Index j = 0; j < solver.eigenvalues().size(); ++j) {
        const double w = std::sqrt(solver.eigenvalues()(j));
        out.omegas.push_back(w);
        out.periods.push_back(2.0 * std::numbers::pi / w);
    }
    return out;
}

struct RayleighCoeffs {
    double a0;  ///< mass-proportional, 1/s
    double a1;  ///< stiffness-proportional, s
};

/// Coefficients giving damping ratio zeta at both omega1 and omega2.
inline RayleighCoeffs rayleigh_coeffs(double omega1, double omega2, double zeta) {
    if (!(omega1 > 0.0 && omega2 >= omega1)) throw ConfigError("rayleigh_coeffs: need 0 < omega1 <= omega2");
    const double s = omega1 + omega2;
    return {2.0 * zeta * omega1 * omega2 / s, 2.0 * zeta / s};
}

/// Damping ratio produced by Rayleigh coefficients at frequency omega.
inline double rayleigh_damping_at(const RayleighCoeffs& c, double omega) {
    return 0.5 * (c.a0 / omega + c.a1 * omega);
}

/// Rayleigh coefficients of a model from its first two modes (one mode: both equal).
inline RayleighCoeffs model_rayleigh(const ShearFrameModel& model) {
    const auto modes = modal_analysis(model);
    const double w1 = modes.omegas.front();
    const double w2 = modes.omegas.size() > 1 ? modes.omegas[1] : w1;
    return rayleigh_coeffs(w1, w2, model.damping_ratio);
}

/// Uniform building (equal masses, heights, stiffnesses) with the storey
/// stiffness chosen so the fundamental period equals `period`.
inline ShearFrameModel uniform_shear_frame(std::size_t storeys, double storey_mass, double storey_height,
                                           double period, double damping_ratio = 0.02,
                                           double yield_drift_ratio = 0.007, double hardening = 0.01) {
    if (storeys == 0) throw ConfigError("uniform_shear_frame: needs at least one storey");
    if (!(period > 0.0)) throw ConfigError("uniform_shear_frame: period must be > 0");
    ShearFrameModel m;
    m.masses.assign(storeys, storey_mass);
    m.stiffnesses.assign(storeys, 1.0);
    m.heights.assign(storeys, storey_height);
    m.yield_drift_ratio = yield_drift_ratio;
    m.hardening = hardening;
    m.damping_ratio = damping_ratio;
    const double w_unit = modal_analysis(m).omegas.front();
    const double w_target = 2.0 * std::numbers::pi / period;
    const double k = (w_target / w_unit) * (w_target / w_unit);
    m.stiffnesses.assign(storeys, k);
    return m;
}

/// Reference building: three storeys of 3 m, T1 = 0.61 s, 2% damping,
/// yielding at 0.7% drift with 1% hardening.
inline ShearFrameModel reference_frame() { return uniform_shear_frame(3, 3.0e4, 3.0, 0.61); }

}  // namespace fragility::structure
