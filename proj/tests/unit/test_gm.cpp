#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "fragility/gm/distributions.hpp"
#include "fragility/gm/filter.hpp"
#include "fragility/gm/modulator.hpp"
#include "fragility/gm/synthesize.hpp"
#include "fragility/im/intensity.hpp"
#include "support/oracles.hpp"

using namespace fragility;
using namespace fragility::gm;

namespace {

constexpr double kPi = std::numbers::pi;

/// Time at which the quadrature-integrated q^2 reaches fraction p of its total.
double energy_time(const ModulatorCoeffs& c, double p) {
    auto q2 = [&](double t) { return std::pow(modulating_q(t, c), 2); };
    const double total = oracle::integrate_to_inf(q2, 0.0);
    double lo = 0.0, hi = 1.0;
    while (oracle::integrate(q2, 0.0, hi) < p * total) hi *= 2.0;
    for (int i = 0; i < 100; ++i) {
        const double mid = 0.5 * (lo + hi);
        (oracle::integrate(q2, 0.0, mid) < p * total ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

/// Spearman rank correlation.
double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    auto ranks = [](const std::vector<double>& v) {
        std::vector<std::size_t> idx(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
        std::vector<double> r(v.size());
        for (std::size_t i = 0; i < idx.size(); ++i) r[idx[i]] = static_cast<double>(i);
        return r;
    };
    const auto rx = ranks(x), ry = ranks(y);
    const double mx = oracle::mean(rx), my = oracle::mean(ry);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace

TEST(Marginals, LognormalAriasSampleMean) {
    const auto d = GMParamDistributions::defaults();
    auto eng = RandomStream(2024).engine();
    std::vector<double> x(100000);
    for (double& v : x) v = d.marginal(0).quantile(open_uniform(eng));
    EXPECT_NEAR(oracle::mean(x) / 0.0468, 1.0, 0.03);
    const auto [m, s] = d.marginal(0).moments();
    EXPECT_NEAR(m, 0.0468, 1e-12);
    EXPECT_NEAR(s, 0.164, 1e-12);
}

TEST(Marginals, BetaDrawsStayOnSupport) {
    const auto d = GMParamDistributions::defaults();
    auto eng = RandomStream(5).engine();
    for (int i = 0; i < 100000; ++i) {
        const double v = d.marginal(1).quantile(open_uniform(eng));
        ASSERT_GE(v, 5.0);
        ASSERT_LE(v, 45.0);
    }
}

TEST(Marginals, BetaShapesReproduceMoments) {
    const auto m = Marginal::fit("effective_duration", {MarginalFamily::Beta, 5.0, 45.0, 17.3, 9.31});
    const auto [a, b] = m.shape();
    const double w = 40.0;
    EXPECT_NEAR(5.0 + w * a / (a + b), 17.3, 1e-10);
    EXPECT_NEAR(w * std::sqrt(a * b / ((a + b) * (a + b) * (a + b + 1.0))), 9.31, 1e-10);
}

TEST(Marginals, GammaAndTwoSidedMomentsByQuadrature) {
    const auto d = GMParamDistributions::defaults();
    {
        const auto [k, theta] = d.marginal(3).shape();
        auto pdf = [&](double x) {
            return std::exp((k - 1) * std::log(x) - x / theta - std::lgamma(k) - k * std::log(theta));
        };
        const double m1 = oracle::integrate_to_inf([&](double x) { return x * pdf(x); }, 0.0);
        const double m2 = oracle::integrate_to_inf([&](double x) { return x * x * pdf(x); }, 0.0);
        EXPECT_NEAR(m1, 5.87, 1e-8);
        EXPECT_NEAR(std::sqrt(m2 - m1 * m1), 3.11, 1e-8);
    }
    {
        const auto [bl, br] = d.marginal(4).shape();
        auto dens = [&](double x) { return x < 0 ? std::exp(x / bl) : std::exp(-x / br); };
        const double z = oracle::integrate(dens, -2.0, 0.0) + oracle::integrate(dens, 0.0, 0.5);
        auto mom = [&](int p) {
            auto f = [&](double x) { return std::pow(x, p) * dens(x); };
            return (oracle::integrate(f, -2.0, 0.0) + oracle::integrate(f, 0.0, 0.5)) / z;
        };
        const double m1 = mom(1), m2 = mom(2);
        EXPECT_NEAR(m1, -0.089, 1e-8);
        EXPECT_NEAR(std::sqrt(m2 - m1 * m1), 0.185, 1e-8);
    }
}

TEST(Marginals, InfeasibleMomentsNameTheParameter) {
    try {
        Marginal::fit("t_mid", {MarginalFamily::Beta, 0.5, 40.0, 12.4, 30.0});
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("t_mid"), std::string::npos);
    }
    EXPECT_THROW(Marginal::fit("omega_slope_hz", {MarginalFamily::TwoSidedExponential, -2.0, 0.5, -0.089, 2.0}),
                 ConfigError);
}

TEST(Marginals, QuantileInvertsTheDistribution) {
    const auto d = GMParamDistributions::defaults();
    for (std::size_t i = 0; i < kGmParamCount; ++i) {
        double prev = -1e300;
        for (double u = 0.01; u < 1.0; u += 0.01) {
            const double v = d.marginal(i).quantile(u);
            ASSERT_GT(v, prev);
            prev = v;
        }
    }
}

TEST(Sampler, CopulaReproducesRankCorrelation) {
    GMParamDistributions::Matrix r = GMParamDistributions::Matrix::Identity();
    r(1, 2) = r(2, 1) = 0.7;
    r(0, 3) = r(3, 0) = -0.3;
    const GMParamDistributions d(GMParamDistributions::default_specs(), r);
    std::vector<double> a, b, c, e;
    for (std::size_t i = 0; i < 20000; ++i) {
        const auto p = sample_gm_params(d, RandomStream(8).child(i));
        a.push_back(p.effective_duration);
        b.push_back(p.t_mid);
        c.push_back(p.arias_intensity);
        e.push_back(p.omega_mid);
    }
    EXPECT_NEAR(spearman(a, b), 0.7, 0.02);
    EXPECT_NEAR(spearman(c, e), -0.3, 0.02);
}

TEST(Sampler, RejectsInvalidCorrelation) {
    GMParamDistributions::Matrix r = GMParamDistributions::Matrix::Identity();
    r(0, 1) = 0.9;
    EXPECT_THROW(GMParamDistributions(GMParamDistributions::default_specs(), r), ConfigError);
    r(1, 0) = 0.9;
    r(0, 2) = r(2, 0) = 0.9;
    r(1, 2) = r(2, 1) = -0.9;
    EXPECT_THROW(GMParamDistributions(GMParamDistributions::default_specs(), r), ConfigError);
}

TEST(Modulator, MatchesDescriptorsByQuadrature) {
    for (auto [ia, d, tm] : {std::tuple{0.05, 15.0, 8.0}, {0.2, 10.0, 6.0}, {0.01, 30.0, 12.0}, {0.1, 6.0, 10.0}}) {
        const auto c = solve_modulator(ia, d, tm);
        EXPECT_NEAR(energy_time(c, 0.45), tm, 1e-6);
        EXPECT_NEAR(energy_time(c, 0.95) - energy_time(c, 0.05), d, 1e-6);
        const double total = oracle::integrate_to_inf([&](double t) { return std::pow(modulating_q(t, c), 2); }, 0.0);
        EXPECT_NEAR(0.5 * kPi * total / ia, 1.0, 1e-9);
        EXPECT_NEAR(c.total_duration, energy_time(c, 0.99) + 2.0, 1e-6);
    }
}

TEST(Modulator, DoublingTimesKeepsShapeHalvesRate) {
    const auto a = solve_modulator(0.05, 12.0, 7.0);
    const auto b = solve_modulator(0.05, 24.0, 14.0);
    EXPECT_NEAR(b.energy_shape(), a.energy_shape(), 1e-9 * a.energy_shape());
    EXPECT_NEAR(b.energy_rate(), 0.5 * a.energy_rate(), 1e-12);
    EXPECT_NEAR(energy_time(b, 0.45), 2.0 * energy_time(a, 0.45), 1e-6);
    EXPECT_NEAR(energy_time(b, 0.95), 2.0 * energy_time(a, 0.95), 1e-5);
}

TEST(Modulator, QuadruplingAriasDoublesAmplitude) {
    const auto a = solve_modulator(0.05, 15.0, 8.0);
    const auto b = solve_modulator(0.2, 15.0, 8.0);
    EXPECT_DOUBLE_EQ(a.alpha2, b.alpha2);
    EXPECT_DOUBLE_EQ(a.alpha3, b.alpha3);
    EXPECT_NEAR(b.alpha1 / a.alpha1, 2.0, 1e-12);
}

TEST(Modulator, InfeasibleRatioIsReported) {
    EXPECT_THROW(solve_modulator(0.05, 40.0, 2.0), InfeasibleDescriptorError);
    EXPECT_THROW(solve_modulator(0.05, 0.0, 2.0), ConfigError);
}

TEST(Modulator, QExamples) {
    EXPECT_EQ(modulating_q(0.0, {1.0, 2.0, 1.0, 10.0}), 0.0);
    const ModulatorCoeffs e{1.0, 1.0, 1.0, 10.0};
    EXPECT_EQ(modulating_q(0.0, e), 1.0);
    for (double t : {0.1, 1.0, 3.7}) EXPECT_NEAR(modulating_q(t, e), std::exp(-t), 1e-15);
    const ModulatorCoeffs c{0.3, 3.4, 0.6, 30.0};
    double best_t = 0.0, best = -1.0;
    for (double t = 0.0; t < 30.0; t += 1e-4)
        if (modulating_q(t, c) > best) best = modulating_q(t, c), best_t = t;
    EXPECT_NEAR(best_t, (c.alpha2 - 1.0) / c.alpha3, 2e-4);
    EXPECT_THROW((ModulatorCoeffs{1.0, 0.8, 1.0, 10.0}.validate()), ConfigError);
}

TEST(Filter, ImpulseResponseExamples) {
    EXPECT_EQ(filter_irf(-0.1, 10.0, 0.2), 0.0);
    EXPECT_EQ(filter_irf(0.0, 10.0, 0.2), 0.0);
    EXPECT_THROW(filter_irf(0.1, 10.0, 1.0), ConfigError);
    const double w = 2.0 * kPi, z = 0.2;
    const double energy = oracle::integrate_to_inf([&](double t) { return std::pow(filter_irf(t, w, z), 2); }, 0.0);
    EXPECT_NEAR(energy, w / (4.0 * z), 1e-9);
}

TEST(Filter, FrequencyLaw) {
    const auto p = GroundMotionParams::from_hz(0.05, 15.0, 8.0, 5.0, -0.1, 0.2);
    EXPECT_DOUBLE_EQ(frequency_at(8.0, p), 2.0 * kPi * 5.0);
    EXPECT_NEAR(frequency_at(18.0, p), 2.0 * kPi * 4.0, 1e-12);
    const auto flat = GroundMotionParams::from_hz(0.05, 15.0, 8.0, 5.0, 0.0, 0.2);
    for (double t : {0.0, 3.0, 30.0}) EXPECT_DOUBLE_EQ(frequency_at(t, flat), 2.0 * kPi * 5.0);
    const auto steep = GroundMotionParams::from_hz(0.05, 15.0, 8.0, 1.0, -1.0, 0.2);
    EXPECT_DOUBLE_EQ(frequency_at(30.0, steep), kMinFilterOmega);
    EXPECT_TRUE(frequency_clipped(steep, 30.0));
    EXPECT_FALSE(frequency_clipped(flat, 30.0));
}

TEST(Synthesis, MatchesDirectDoubleSum) {
    const auto p = GroundMotionParams::from_hz(0.05, 6.0, 3.0, 3.0, -0.2, 0.15);
    const auto c = solve_modulator(p.arias_intensity, p.effective_duration, p.t_mid);
    const RandomStream s(77, 3);
    const double dt = 0.02;
    const auto syn = synthesize_detailed(c, p, s, dt);
    const std::size_t n = syn.motion.size();
    ASSERT_EQ(n, static_cast<std::size_t>(std::ceil(c.total_duration / dt)));

    auto eng = s.engine();
    std::vector<double> u(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) u[i] = standard_normal(eng);
    for (std::size_t k = 0; k < n; ++k) {
        const double tk = static_cast<double>(k) * dt;
        double num = 0.0, den = 0.0, weights = 0.0;
        for (std::size_t i = 1; i <= k; ++i) {
            const double ti = static_cast<double>(i) * dt;
            const double h = filter_irf(tk - ti, frequency_at(ti, p), p.bandwidth_zeta);
            num += h * u[i];
            den += h * h;
        }
        const double expected = den > 0.0 ? num / std::sqrt(den) : 0.0;
        if (den > 0.0) {
            for (std::size_t i = 1; i <= k; ++i) {
                const double ti = static_cast<double>(i) * dt;
                weights += std::pow(filter_irf(tk - ti, frequency_at(ti, p), p.bandwidth_zeta), 2) / den;
            }
            ASSERT_NEAR(weights, 1.0, 1e-12);
        }
        ASSERT_NEAR(syn.unit_process[k], expected, 1e-9 * std::max(1.0, std::abs(expected))) << "k=" << k;
        ASSERT_NEAR(syn.motion.samples()[k], modulating_q(tk, c) * syn.unit_process[k], 1e-12);
    }
}

TEST(Synthesis, UnitVarianceAcrossRealizations) {
    const auto p = GroundMotionParams::from_hz(0.05, 6.0, 4.0, 4.0, 0.0, 0.3);
    const auto c = solve_modulator(p.arias_intensity, p.effective_duration, p.t_mid);
    const std::vector<std::size_t> probes{50, 200, 400, 700};
    std::vector<std::vector<double>> v(probes.size());
    for (std::size_t r = 0; r < 1000; ++r) {
        const auto s = synthesize_detailed(c, p, RandomStream(123).child(r));
        for (std::size_t j = 0; j < probes.size(); ++j) v[j].push_back(s.unit_process[probes[j]]);
    }
    for (const auto& x : v) {
        const double var = std::pow(oracle::stddev(x), 2);
        EXPECT_GT(var, 0.9);
        EXPECT_LT(var, 1.1);
    }
}

TEST(Synthesis, ZeroAmplitudeAndDeterminism) {
    const auto p = GroundMotionParams::from_hz(0.05, 15.0, 8.0, 5.0, -0.1, 0.2);
    const auto silent = synthesize_detailed(ModulatorCoeffs{0.0, 2.0, 0.5, 10.0}, p, RandomStream(1));
    for (double a : silent.motion.samples()) ASSERT_EQ(a, 0.0);

    const auto a = synthesize(p, RandomStream(5, 9));
    const auto b = synthesize(p, RandomStream(5, 9));
    ASSERT_EQ(a.samples(), b.samples());
    const auto c = synthesize(p, RandomStream(5, 10));
    EXPECT_NE(a.samples(), c.samples());
}

TEST(Synthesis, CausalPrefix) {
    const auto p = GroundMotionParams::from_hz(0.05, 15.0, 8.0, 5.0, -0.1, 0.2);
    auto c = solve_modulator(p.arias_intensity, p.effective_duration, p.t_mid);
    const auto full = synthesize_detailed(c, p, RandomStream(4)).motion.samples();
    c.total_duration *= 0.5;
    const auto half = synthesize_detailed(c, p, RandomStream(4)).motion.samples();
    ASSERT_LT(half.size(), full.size());
    for (std::size_t k = 0; k < half.size(); ++k) ASSERT_EQ(half[k], full[k]);
}

TEST(Synthesis, RejectsCoarseStep) {
    const auto p = GroundMotionParams::from_hz(0.05, 15.0, 8.0, 5.0, -0.1, 0.2);
    EXPECT_THROW(synthesize(p, RandomStream(1), 0.05), ConfigError);
}

TEST(Synthesis, EnergyConsistencyOverRealizations) {
    const auto p = GroundMotionParams::from_hz(0.08, 12.0, 7.0, 4.0, -0.05, 0.25);
    std::vector<double> ia, t45;
    for (std::size_t r = 0; r < 500; ++r) {
        const auto a = synthesize(p, RandomStream(99).child(r));
        ia.push_back(im::arias_intensity(a));
        t45.push_back(im::t_alpha(a, 0.45));
    }
    EXPECT_NEAR(oracle::mean(ia) / p.arias_intensity, 1.0, 0.05);
    EXPECT_NEAR(oracle::mean(t45) / p.t_mid, 1.0, 0.05);
}

TEST(Sampler, DrawsAreValidParameterSets) {
    const auto d = GMParamDistributions::defaults();
    for (std::size_t i = 0; i < 5000; ++i) EXPECT_NO_THROW(sample_gm_params(d, RandomStream(3).child(i)).validate());
}
