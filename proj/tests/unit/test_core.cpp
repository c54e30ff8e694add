#include <atomic>
#include <cmath>
#include <set>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "fragility/core/error.hpp"
#include "fragility/core/nelder_mead.hpp"
#include "fragility/core/normal.hpp"
#include "fragility/core/parallel.hpp"
#include "fragility/core/random_stream.hpp"
#include "support/oracles.hpp"

using namespace fragility;

TEST(RandomStream, SameSeedAndIndexGiveSameSequence) {
    auto a = RandomStream(42, 7).engine();
    auto b = RandomStream(42, 7).engine();
    for (int i = 0; i < 1000; ++i) ASSERT_EQ(a(), b());
}

TEST(RandomStream, DistinctIndicesAndChildrenDiffer) {
    std::set<std::uint64_t> first;
    const RandomStream base(3);
    for (std::uint64_t k = 0; k < 200; ++k) first.insert(base.child(k).engine()());
    first.insert(base.engine()());
    first.insert(RandomStream(4).engine()());
    EXPECT_EQ(first.size(), 202u);
    EXPECT_EQ(base.child(5), base.child(5));
    EXPECT_NE(base.child(5).child(0), base.child(0).child(5));
}

TEST(RandomStream, OpenUniformStaysInside) {
    auto eng = RandomStream(1).engine();
    double lo = 1.0, hi = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double u = open_uniform(eng);
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
        lo = std::min(lo, u);
        hi = std::max(hi, u);
    }
    EXPECT_LT(lo, 1e-3);
    EXPECT_GT(hi, 1.0 - 1e-3);
}

TEST(RandomStream, StandardNormalMoments) {
    auto eng = RandomStream(11).engine();
    std::vector<double> z(200000);
    for (double& v : z) v = standard_normal(eng);
    EXPECT_NEAR(oracle::mean(z), 0.0, 0.01);
    EXPECT_NEAR(oracle::stddev(z), 1.0, 0.01);
}

TEST(Normal, CdfMatchesErfOracle) {
    for (double x = -8.0; x <= 8.0; x += 0.25) EXPECT_NEAR(normal_cdf(x), oracle::phi(x), 1e-15);
    EXPECT_NEAR(normal_cdf(1.0), 0.841344746068543, 1e-12);
}

TEST(Normal, LogCdfIsFiniteFarInTheTail) {
    EXPECT_NEAR(log_normal_cdf(-2.0), std::log(oracle::phi(-2.0)), 1e-12);
    EXPECT_NEAR(log_normal_cdf(-35.0), std::log(oracle::phi(-35.0)), 1e-6 * std::abs(std::log(oracle::phi(-35.0))));
    const double far = log_normal_cdf(-1e3);
    EXPECT_TRUE(std::isfinite(far));
    EXPECT_NEAR(far / (-0.5e6), 1.0, 1e-4);
}

TEST(NelderMead, FindsRosenbrockMinimum) {
    auto rosen = [](const std::vector<double>& x) {
        return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
    };
    SimplexOptions opt;
    opt.f_tol_abs = 1e-14;
    opt.x_tol = 1e-9;
    opt.max_evaluations = 20000;
    const auto r = nelder_mead(rosen, {-1.2, 1.0}, opt);
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.x[0], 1.0, 1e-5);
    EXPECT_NEAR(r.x[1], 1.0, 1e-5);
}

TEST(NelderMead, TreatsNonFiniteAsWorse) {
    auto f = [](const std::vector<double>& x) {
        return x[0] < 0.0 ? std::numeric_limits<double>::quiet_NaN() : (x[0] - 2.0) * (x[0] - 2.0);
    };
    const auto r = nelder_mead(f, {0.05}, SimplexOptions{});
    EXPECT_NEAR(r.x[0], 2.0, 1e-4);
}

TEST(ParallelFor, ResultsIndependentOfThreadCount) {
    auto run = [](unsigned threads) {
        std::vector<std::uint64_t> out(500);
        parallel_for(out.size(), threads, [&](std::size_t i) { out[i] = RandomStream(9).child(i).engine()(); });
        return out;
    };
    const auto one = run(1);
    EXPECT_EQ(one, run(3));
    EXPECT_EQ(one, run(8));
}

TEST(ParallelFor, RethrowsFirstFailure) {
    std::atomic<int> ran{0};
    EXPECT_THROW(parallel_for(100, 4,
                              [&](std::size_t i) {
                                  ++ran;
                                  if (i == 17) throw DataError("boom");
                              }),
                 DataError);
    EXPECT_GT(ran.load(), 0);
}

TEST(Errors, KindsMapToExitCodes) {
    EXPECT_EQ(static_cast<int>(ConfigError("x").kind()), 1);
    EXPECT_EQ(static_cast<int>(DataError("x").kind()), 2);
    EXPECT_EQ(static_cast<int>(NumericalError("x").kind()), 3);
}
