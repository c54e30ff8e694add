#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "fragility/core/random_stream.hpp"
#include "fragility/param/linear_demand.hpp"
#include "fragility/param/lognormal.hpp"
#include "fragility/param/mle.hpp"
#include "fragility/param/segmented.hpp"
#include "support/oracles.hpp"

using namespace fragility;
using namespace fragility::param;

namespace {

/// ln(delta) = a ln(im) + b + zeta Z with ln(im) ~ N(ln 0.3, 0.6^2).
std::vector<DemandPoint> linear_sample(double a, double b, double zeta, std::size_t n, std::uint64_t seed) {
    auto eng = RandomStream(seed).engine();
    std::vector<DemandPoint> out(n);
    for (auto& d : out) {
        const double x = std::log(0.3) + 0.6 * standard_normal(eng);
        d.im = std::exp(x);
        d.delta = std::exp(a * x + b + zeta * standard_normal(eng));
    }
    return out;
}

/// Independent OLS through Eigen's QR.
Eigen::Vector2d qr_line(const std::vector<DemandPoint>& d) {
    Eigen::MatrixXd x(d.size(), 2);
    Eigen::VectorXd y(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        x(static_cast<Eigen::Index>(i), 0) = std::log(d[i].im);
        x(static_cast<Eigen::Index>(i), 1) = 1.0;
        y(static_cast<Eigen::Index>(i)) = std::log(d[i].delta);
    }
    return x.colPivHouseholderQr().solve(y);
}

}  // namespace

TEST(Lognormal, MedianAndMonotonicity) {
    const LognormalCurve c{0.4, 0.35};
    EXPECT_NEAR(lognormal_eval(c, 0.4), 0.5, 1e-15);
    EXPECT_EQ(lognormal_eval(c, 0.0), 0.0);
    EXPECT_NEAR(lognormal_eval(c, 0.4 * std::exp(0.35)), oracle::phi(1.0), 1e-14);
    const auto curve = to_curve(c, log_spaced(0.01, 3.0, 40), "mle");
    for (std::size_t i = 1; i < curve.size(); ++i) ASSERT_GT(*curve.probability[i], *curve.probability[i - 1]);
    EXPECT_THROW(to_curve(c, std::vector<double>{0.2, 0.1}, "mle"), ConfigError);
}

TEST(LinearDemand, ExactLineIsRecovered) {
    std::vector<DemandPoint> d;
    for (int i = 1; i <= 30; ++i) {
        const double im = 0.02 * i;
        d.push_back({im, std::exp(1.1 * std::log(im) - 3.2)});
    }
    const auto f = fit_linear_demand(d);
    EXPECT_NEAR(f.slope, 1.1, 1e-12);
    EXPECT_NEAR(f.intercept, -3.2, 1e-12);
    EXPECT_NEAR(f.zeta_res, 0.0, 1e-6);
    EXPECT_NEAR(f.r2, 1.0, 1e-12);
    const auto c = lr_to_fragility(f, 0.01);
    EXPECT_NEAR(c.alpha, std::exp((std::log(0.01) + 3.2) / 1.1), 1e-9);
}

TEST(LinearDemand, MatchesQrOracle) {
    const auto d = linear_sample(0.9, -4.0, 0.3, 2000, 17);
    const auto f = fit_linear_demand(d);
    const auto q = qr_line(d);
    EXPECT_NEAR(f.slope, q(0), 1e-10);
    EXPECT_NEAR(f.intercept, q(1), 1e-10);
    double sse = 0.0;
    for (const auto& p : d) sse += std::pow(std::log(p.delta) - q(0) * std::log(p.im) - q(1), 2);
    EXPECT_NEAR(f.zeta_res, std::sqrt(sse / 1998.0), 1e-10);
    EXPECT_NEAR(f.slope, 0.9, 0.03);
    EXPECT_NEAR(f.zeta_res, 0.3, 0.02);
}

TEST(LinearDemand, FragilityIdentity) {
    const auto f = fit_linear_demand(linear_sample(1.2, -3.5, 0.4, 500, 3));
    const double d0 = 0.014;
    const auto c = lr_to_fragility(f, d0);
    for (double im : {0.05, 0.2, 0.5, 1.3}) {
        const double direct = oracle::phi((f.slope * std::log(im) + f.intercept - std::log(d0)) / f.zeta_res);
        EXPECT_NEAR(lognormal_eval(c, im), direct, 1e-12);
    }
}

TEST(LinearDemand, Errors) {
    EXPECT_THROW(fit_linear_demand(std::vector<DemandPoint>{{0.1, 0.01}, {0.2, 0.02}}), DataError);
    EXPECT_THROW(fit_linear_demand(std::vector<DemandPoint>{{0.1, 0.01}, {0.2, 0.0}, {0.3, 0.02}}), DataError);
    EXPECT_THROW(fit_linear_demand(std::vector<DemandPoint>{{0.1, 0.01}, {0.1, 0.02}, {0.1, 0.03}}), DataError);
    DemandModelFit flat;
    flat.slope = -0.1;
    EXPECT_THROW(lr_to_fragility(flat, 0.01), NumericalError);
}

TEST(Mle, RecoversBernoulliModel) {
    auto eng = RandomStream(5).engine();
    const double alpha = 0.35, beta = 0.4;
    std::vector<DemandPoint> d(5000);
    for (auto& p : d) {
        p.im = std::exp(std::log(0.3) + 0.7 * standard_normal(eng));
        const bool fail = open_uniform(eng) < oracle::phi(std::log(p.im / alpha) / beta);
        p.delta = fail ? 0.02 : 0.001;
    }
    const auto f = fit_mle(d, 0.01);
    EXPECT_TRUE(f.converged);
    EXPECT_FALSE(f.separation);
    EXPECT_NEAR(f.curve.alpha / alpha, 1.0, 0.05);
    EXPECT_NEAR(f.curve.beta / beta, 1.0, 0.1);

    // stationary point of the likelihood
    const double la = std::log(f.curve.alpha), lb = std::log(f.curve.beta), h = 1e-4;
    auto ll = [&](double x, double y) { return bernoulli_log_likelihood(d, 0.01, std::exp(x), std::exp(y)); };
    EXPECT_NEAR((ll(la + h, lb) - ll(la - h, lb)) / (2 * h), 0.0, 0.05);
    EXPECT_NEAR((ll(la, lb + h) - ll(la, lb - h)) / (2 * h), 0.0, 0.05);
    for (double dx : {-0.01, 0.01})
        for (double dy : {-0.01, 0.01}) EXPECT_LE(ll(la + dx, lb + dy), f.log_likelihood + 1e-9);
}

TEST(Mle, IndependentOfRecordOrder) {
    auto d = linear_sample(1.0, -4.0, 0.5, 400, 9);
    const auto a = fit_mle(d, 0.014);
    std::shuffle(d.begin(), d.end(), std::mt19937_64(4));
    const auto b = fit_mle(d, 0.014);
    EXPECT_EQ(a.curve.alpha, b.curve.alpha);
    EXPECT_EQ(a.curve.beta, b.curve.beta);
}

TEST(Mle, SeparatedDataIsFlagged) {
    std::vector<DemandPoint> d;
    for (int i = 1; i <= 40; ++i) d.push_back({0.01 * i, i > 20 ? 0.02 : 0.001});
    const auto f = fit_mle(d, 0.01);
    EXPECT_TRUE(f.separation);
    EXPECT_GT(f.curve.alpha, 0.2);
    EXPECT_LT(f.curve.alpha, 0.21);
}

TEST(Mle, DegenerateDataThrows) {
    std::vector<DemandPoint> d{{0.1, 0.001}, {0.2, 0.002}, {0.3, 0.003}};
    EXPECT_THROW(fit_mle(d, 0.01), DataError);
    EXPECT_THROW(fit_mle(d, 0.0), ConfigError);
}

TEST(Segmented, RecoversHinge) {
    auto eng = RandomStream(12).engine();
    const double psi = std::log(0.4);
    std::vector<DemandPoint> d(3000);
    for (auto& p : d) {
        const double x = std::log(0.05) + (std::log(2.0) - std::log(0.05)) * open_uniform(eng);
        const double y = -3.0 + 0.8 * x + 1.2 * std::max(x - psi, 0.0) + 0.05 * standard_normal(eng);
        p = {std::exp(x), std::exp(y)};
    }
    const auto f = fit_segmented(d);
    EXPECT_EQ(f.status, SegmentStatus::Segmented);
    EXPECT_NEAR(std::log(f.break_im), psi, 0.03);
    EXPECT_NEAR(f.segments[0].slope, 0.8, 0.02);
    EXPECT_NEAR(f.segments[1].slope, 2.0, 0.02);
    EXPECT_NEAR(f.segments[0].zeta_res, 0.05, 0.005);
    EXPECT_NEAR(f.segments[1].zeta_res, 0.05, 0.005);
    EXPECT_EQ(f.segments[0].count + f.segments[1].count, d.size());
    // continuity at the break
    const double lb = std::log(f.break_im);
    EXPECT_NEAR(f.segments[0].slope * lb + f.segments[0].intercept, f.segments[1].slope * lb + f.segments[1].intercept,
                1e-10);
    EXPECT_LE(f.sse, f.linear_sse);
}

TEST(Segmented, LinearDataIsEffectivelyLinear) {
    std::vector<DemandPoint> d;
    for (int i = 1; i <= 100; ++i) {
        const double im = 0.01 * i;
        d.push_back({im, std::exp(0.7 * std::log(im) - 4.0)});
    }
    const auto f = fit_segmented(d);
    EXPECT_EQ(f.status, SegmentStatus::EffectivelyLinear);
    EXPECT_NEAR(f.segments[0].slope, 0.7, 1e-6);
    EXPECT_NEAR(f.segments[1].slope, 0.7, 1e-6);
}

TEST(Segmented, NoAdmissibleBreakFallsBack) {
    std::vector<DemandPoint> d;
    for (int i = 0; i < 20; ++i) d.push_back({i < 5 ? 0.1 : 0.3, 0.001 * (1.0 + 0.01 * i)});
    const auto f = fit_segmented(d);
    EXPECT_EQ(f.status, SegmentStatus::FallbackLinear);
    EXPECT_EQ(f.segments[0].slope, f.segments[1].slope);
    EXPECT_THROW(fit_segmented(std::vector<DemandPoint>(10, {0.1, 0.01})), DataError);
}

TEST(Segmented, FragilityUsesTheContainingSegment) {
    SegmentedFit f;
    f.break_im = 0.5;
    f.segments[0] = {1.0, -4.0, 0.3, 0.9, 10};
    f.segments[1] = {2.0, std::log(0.5) * (1.0 - 2.0) - 4.0, 0.5, 0.9, 10};
    const double d0 = 0.01;
    EXPECT_NEAR(segmented_to_fragility(f, d0, 0.2), oracle::phi((std::log(0.2) - 4.0 - std::log(d0)) / 0.3), 1e-14);
    EXPECT_NEAR(segmented_to_fragility(f, d0, 1.0),
                oracle::phi((2.0 * std::log(1.0) + f.segments[1].intercept - std::log(d0)) / 0.5), 1e-14);
    const auto c = segmented_curve(f, d0, log_spaced(0.05, 2.0, 30), im::ImKind::Sa);
    EXPECT_EQ(c.method, "segmented");
    EXPECT_EQ(c.im_kind, im::ImKind::Sa);
}
