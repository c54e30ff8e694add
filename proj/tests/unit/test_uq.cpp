#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <vector>

#include <gtest/gtest.h>

#include "fragility/core/random_stream.hpp"
#include "fragility/nonparam/bmcs.hpp"
#include "fragility/param/lognormal.hpp"
#include "fragility/uq/bootstrap.hpp"
#include "support/oracles.hpp"

using namespace fragility;
using namespace fragility::uq;

namespace {

std::vector<DemandPoint> sample(std::size_t n, std::uint64_t seed) {
    auto eng = RandomStream(seed).engine();
    std::vector<DemandPoint> out(n);
    for (auto& d : out) {
        const double x = std::log(0.3) + 0.5 * standard_normal(eng);
        d = {std::exp(x), std::exp(x + std::log(0.02) + 0.4 * standard_normal(eng))};
    }
    return out;
}

FragilityCurve curve_of(std::vector<double> grid, std::vector<std::optional<double>> p) {
    FragilityCurve c;
    c.im_grid = std::move(grid);
    c.probability = std::move(p);
    return c;
}

}  // namespace

TEST(Resample, DrawsFromTheRecordsDeterministically) {
    const auto d = sample(50, 1);
    const auto a = resample(d, RandomStream(3, 1));
    const auto b = resample(d, RandomStream(3, 1));
    ASSERT_EQ(a.size(), d.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].im, b[i].im);
        EXPECT_TRUE(std::any_of(d.begin(), d.end(), [&](const DemandPoint& p) { return p.im == a[i].im; }));
    }
    EXPECT_THROW(resample(std::vector<DemandPoint>{}, RandomStream(1)), DataError);
}

TEST(Resample, IndicesAreUniform) {
    std::vector<DemandPoint> d(10);
    for (std::size_t i = 0; i < 10; ++i) d[i] = {static_cast<double>(i + 1), 1.0};
    std::map<double, int> counts;
    for (std::size_t r = 0; r < 2000; ++r)
        for (const auto& p : resample(d, RandomStream(5).child(r))) ++counts[p.im];
    ASSERT_EQ(counts.size(), 10u);
    for (const auto& [k, c] : counts) EXPECT_NEAR(c / 20000.0, 0.1, 0.01) << k;
}

TEST(Percentile, LowerOrderStatistic) {
    const std::vector<double> v{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    EXPECT_EQ(percentile_lower(v, 0.5), 5);
    EXPECT_EQ(percentile_lower(v, 0.025), 1);
    EXPECT_EQ(percentile_lower(v, 0.975), 10);
    EXPECT_EQ(percentile_lower(v, 0.3), 3);
    const std::vector<double> odd{1, 2, 3};
    EXPECT_EQ(percentile_lower(odd, 0.5), 2);
    std::vector<double> hundred(100);
    for (int i = 0; i < 100; ++i) hundred[static_cast<std::size_t>(i)] = i;
    EXPECT_EQ(percentile_lower(hundred, 0.025), 2);
    EXPECT_EQ(percentile_lower(hundred, 0.975), 97);
}

TEST(MedianIm, InterpolatesInLogIm) {
    const auto c = curve_of({0.1, 0.2, 0.4}, {0.1, 0.3, 0.7});
    EXPECT_NEAR(*median_im(c), std::exp(std::log(0.2) + 0.5 * std::log(2.0)), 1e-14);
    const auto exact = curve_of({0.1, 0.2, 0.4}, {0.1, 0.5, 0.7});
    EXPECT_NEAR(*median_im(exact), 0.2, 1e-15);
}

TEST(MedianIm, SkipsUndefinedPoints) {
    const auto c = curve_of({0.1, 0.2, 0.4, 0.8}, {0.2, std::nullopt, std::nullopt, 0.8});
    EXPECT_NEAR(*median_im(c), std::sqrt(0.1 * 0.8), 1e-14);
}

TEST(MedianIm, MissingWhenNoCrossing) {
    EXPECT_FALSE(median_im(curve_of({0.1, 0.2}, {0.6, 0.9})));
    EXPECT_FALSE(median_im(curve_of({0.1, 0.2}, {0.1, 0.4})));
    EXPECT_FALSE(median_im(curve_of({0.1, 0.2}, {std::nullopt, std::nullopt})));
    // a dip below 0.5 after starting above does not count
    EXPECT_FALSE(median_im(curve_of({0.1, 0.2, 0.3}, {0.6, 0.4, 0.7})));
}

TEST(MedianIm, LognormalCurveRecoversAlpha) {
    const param::LognormalCurve l{0.37, 0.45};
    EXPECT_NEAR(*median_im(param::to_curve(l, log_spaced(0.05, 2.0, 400), "mle")), 0.37, 1e-3);
}

TEST(MedianIm, LogStdUsesSampleDenominator) {
    std::vector<std::optional<double>> m;
    std::vector<double> logs;
    for (int i = 0; i < 12; ++i) {
        const double v = 0.3 * std::exp(0.1 * (i % 5) - 0.2);
        m.emplace_back(v);
        logs.push_back(std::log(v));
    }
    m.emplace_back(std::nullopt);
    const auto s = median_im_logstd(m);
    EXPECT_EQ(s.count, 12u);
    EXPECT_NEAR(s.log_std, oracle::stddev(logs), 1e-14);
    m.resize(9);
    EXPECT_THROW(median_im_logstd(m), NumericalError);
}

TEST(Bootstrap, IndependentOfThreadCount) {
    const auto d = sample(800, 2);
    const auto grid = log_spaced(0.15, 0.6, 10);
    auto est = [&](std::span<const DemandPoint> s) { return nonparam::bmcs_fragility(s, 0.007, grid); };
    BootstrapOptions opt;
    opt.replicates = 40;
    const auto one = bootstrap_curves(d, est, grid, RandomStream(9, 1), opt, "bmcs");
    opt.threads = 4;
    const auto four = bootstrap_curves(d, est, grid, RandomStream(9, 1), opt, "bmcs");
    EXPECT_EQ(one.median, four.median);
    EXPECT_EQ(one.lower, four.lower);
    EXPECT_EQ(one.upper, four.upper);
    EXPECT_EQ(one.median_ims, four.median_ims);
    EXPECT_EQ(one.median_curve().method, "bmcs-median");
}

TEST(Bootstrap, BandIsOrderedAndMatchesReplicates) {
    const auto d = sample(800, 3);
    const auto grid = log_spaced(0.15, 0.6, 10);
    auto est = [&](std::span<const DemandPoint> s) { return nonparam::bmcs_fragility(s, 0.007, grid); };
    BootstrapOptions opt;
    opt.replicates = 60;
    opt.level = 0.9;
    const auto ens = bootstrap_curves(d, est, grid, RandomStream(4), opt);
    for (std::size_t j = 0; j < grid.size(); ++j) {
        ASSERT_TRUE(ens.median[j] && ens.lower[j] && ens.upper[j]);
        EXPECT_LE(*ens.lower[j], *ens.median[j]);
        EXPECT_LE(*ens.median[j], *ens.upper[j]);
        // replicate r is the estimator applied to resample(base.child(r))
        std::vector<double> v;
        for (std::size_t r = 0; r < 60; ++r) v.push_back(*est(resample(d, RandomStream(4).child(r))).probability[j]);
        std::sort(v.begin(), v.end());
        EXPECT_EQ(*ens.median[j], v[29]);
        EXPECT_EQ(*ens.lower[j], v[2]);
        EXPECT_EQ(*ens.upper[j], v[56]);
        EXPECT_EQ(ens.valid_count[j], 60u);
    }
}

TEST(Bootstrap, CountsAndToleratesSomeFailures) {
    const auto d = sample(300, 5);
    const auto grid = log_spaced(0.15, 0.6, 5);
    std::vector<double> ims;
    for (const auto& p : d) ims.push_back(p.im);
    std::sort(ims.begin(), ims.end());
    const double cut = ims[ims.size() * 9 / 10];
    auto est = [&](std::span<const DemandPoint> s) {
        if (s[0].im > cut) throw DataError("first record too strong");
        return nonparam::bmcs_fragility(s, 0.007, grid);
    };
    BootstrapOptions opt;
    opt.replicates = 100;
    const auto ens = bootstrap_curves(d, est, grid, RandomStream(6), opt);
    std::size_t expected = 0;
    for (std::size_t r = 0; r < 100; ++r) expected += resample(d, RandomStream(6).child(r))[0].im > cut;
    EXPECT_EQ(ens.failures(), expected);
    EXPECT_GT(expected, 0u);
    for (std::size_t r = 0; r < 100; ++r)
        if (ens.failed[r]) EXPECT_FALSE(ens.median_ims[r].has_value());
}

TEST(Bootstrap, TooManyFailuresAbort) {
    const auto d = sample(300, 5);
    const auto grid = log_spaced(0.15, 0.6, 5);
    auto est = [&](std::span<const DemandPoint> s) {
        if (s[0].im > 0.3) throw DataError("strong");
        return nonparam::bmcs_fragility(s, 0.007, grid);
    };
    EXPECT_THROW(bootstrap_curves(d, est, grid, RandomStream(6)), NumericalError);

    const auto other = log_spaced(0.1, 0.6, 5);
    auto moved = [&](std::span<const DemandPoint> s) { return nonparam::bmcs_fragility(s, 0.007, other); };
    EXPECT_THROW(bootstrap_curves(d, moved, grid, RandomStream(6)), NumericalError);
}

TEST(Bootstrap, OptionValidation) {
    const auto d = sample(50, 5);
    const auto grid = log_spaced(0.15, 0.6, 5);
    auto est = [&](std::span<const DemandPoint> s) { return nonparam::bmcs_fragility(s, 0.007, grid); };
    BootstrapOptions opt;
    opt.replicates = 1;
    EXPECT_THROW(bootstrap_curves(d, est, grid, RandomStream(1), opt), ConfigError);
    opt.replicates = 10;
    opt.level = 1.0;
    EXPECT_THROW(bootstrap_curves(d, est, grid, RandomStream(1), opt), ConfigError);
}
