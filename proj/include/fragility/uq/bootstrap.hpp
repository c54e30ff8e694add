#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fragility/core/error.hpp"
#include "fragility/core/parallel.hpp"
#include "fragility/core/random_stream.hpp"
#include "fragility/im/demand_point.hpp"
#include "fragility/nonparam/fragility_curve.hpp"

namespace fragility::uq {

/// N draws with replacement, N = records.size().
inline std::vector<DemandPoint> resample(std::span<const DemandPoint> records, const RandomStream& stream) {
    if (records.empty()) throw DataError("resample: no records");
    auto eng = stream.engine();
    const auto n = records.size();
    std::vector<DemandPoint> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto k = static_cast<std::size_t>(open_uniform(eng) * static_cast<double>(n));
        out.push_back(records[std::min(k, n - 1)]);
    }
    return out;
}

/// Order statistic for probability p among sorted values: index ceil(p m) - 1,
/// so the median of an even count is the lower middle value.
inline double percentile_lower(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw DataError("percentile of an empty sample");
    const auto m = static_cast<double>(sorted.size());
    const double r = std::ceil(p * m - 1e-12);
    const auto idx = static_cast<std::size_t>(std::clamp(r - 1.0, 0.0, m - 1.0));
    return sorted[idx];
}

/// IM at the first upward crossing of 0.5, interpolated linearly in
/// (ln IM, probability) between consecutive defined points.
inline std::optional<double> median_im(const FragilityCurve& curve) {
    std::optional<std::size_t> prev;
    for (std::size_t j = 0; j < curve.size(); ++j) {
        if (!curve.probability[j]) continue;
        const double pj = *curve.probability[j];
        if (!prev) {
            if (pj >= 0.5) return std::nullopt;
            prev = j;
            continue;
        }
        const double pp = *curve.probability[*prev];
        if (pp < 0.5 && pj >= 0.5) {
            const double la = std::log(curve.im_grid[*prev]);
            const double lb = std::log(curve.im_grid[j]);
            return std::exp(la + (0.5 - pp) / (pj - pp) * (lb - la));
        }
        prev = j;
    }
    return std::nullopt;
}

struct MedianIMStats {
    double log_std = 0.0;
    std::size_t count = 0;
};

inline constexpr std::size_t kMinMedianSamples = 10;

inline MedianIMStats median_im_logstd(std::span<const std::optional<double>> medians) {
    std::vector<double> logs;
    for (const auto& m : medians)
        if (m && *m > 0.0) logs.push_back(std::log(*m));
    if (logs.size() < kMinMedianSamples)
        throw NumericalError("median IM statistics: need at least " + std::to_string(kMinMedianSamples) +
                             " valid samples, got " + std::to_string(logs.size()));
    double mean = 0.0;
    for (double v : logs) mean += v;
    mean /= static_cast<double>(logs.size());
    double s2 = 0.0;
    for (double v : logs) s2 += (v - mean) * (v - mean);
    s2 /= static_cast<double>(logs.size() - 1);
    return {std::sqrt(s2), logs.size()};
}

struct BootstrapOptions {
    std::size_t replicates = 100;
    double level = 0.95;
    unsigned threads = 1;
    double max_failure_fraction = 0.20;
};

struct BootstrapEnsemble {
    std::string estimator;
    std::vector<double> im_grid;
    std::vector<FragilityCurve> curves;       ///< one per replicate; empty for failed replicates
    std::vector<bool> failed;
    std::vector<std::string> failure_reason;
    std::vector<std::optional<double>> median, lower, upper;
    std::vector<std::size_t> valid_count;     ///< defined replicate values per grid point
    std::vector<std::optional<double>> median_ims;
    double level = 0.95;

    std::size_t failures() const { return static_cast<std::size_t>(std::count(failed.begin(), failed.end(), true)); }

    MedianIMStats median_im_stats() const { return median_im_logstd(median_ims); }

    FragilityCurve median_curve() const { return band_curve(median, "median"); }
    FragilityCurve lower_curve() const { return band_curve(lower, "lower"); }
    FragilityCurve upper_curve() const { return band_curve(upper, "upper"); }

private:
    FragilityCurve band_curve(const std::vector<std::optional<double>>& p, const char* tag) const {
        FragilityCurve c;
        c.im_grid = im_grid;
        c.probability = p;
        c.support = valid_count;
        c.method = estimator + "-" + tag;
        for (const auto& k : curves)
            if (!k.im_grid.empty()) {
                c.im_kind = k.im_kind;
                c.threshold = k.threshold;
                break;
            }
        return c;
    }
};

/// Runs `estimator` (records -> FragilityCurve on `grid`) on M resamples.
/// Replicate r uses base.child(r), so the ensemble does not depend on the
/// order or thread in which replicates are evaluated. A replicate whose
/// estimator throws is recorded as failed; more than the allowed failure
/// fraction aborts the ensemble.
template <class Estimator>
BootstrapEnsemble bootstrap_curves(std::span<const DemandPoint> records, Estimator&& estimator,
                                   std::span<const double> grid, const RandomStream& base,
                                   const BootstrapOptions& opt = {}, std::string name = "estimator") {
    if (opt.replicates < 2) throw ConfigError("bootstrap: need at least 2 replicates");
    if (!(opt.level > 0.0 && opt.level < 1.0)) throw ConfigError("bootstrap: level must lie in (0, 1)");
    if (records.empty()) throw DataError("bootstrap: no records");
    validate_grid(grid);

    const std::size_t m = opt.replicates;
    BootstrapEnsemble ens;
    ens.estimator = std::move(name);
    ens.im_grid.assign(grid.begin(), grid.end());
    ens.level = opt.level;
    ens.curves.resize(m);
    ens.failure_reason.resize(m);
    std::vector<char> failed(m, 0);

    parallel_for(m, opt.threads, [&](std::size_t r) {
        try {
            const auto sample = resample(records, base.child(r));
            FragilityCurve c = estimator(std::span<const DemandPoint>(sample));
            if (c.im_grid.size() != grid.size() || !std::equal(c.im_grid.begin(), c.im_grid.end(), grid.begin()))
                throw ConfigError("bootstrap: estimator changed the IM grid");
            ens.curves[r] = std::move(c);
        } catch (const Error& e) {
            failed[r] = 1;
            ens.failure_reason[r] = e.what();
        }
    });
    ens.failed.assign(failed.begin(), failed.end());

    const auto n_failed = ens.failures();
    if (static_cast<double>(n_failed) > opt.max_failure_fraction * static_cast<double>(m))
        throw NumericalError("bootstrap: " + std::to_string(n_failed) + " of " + std::to_string(m) +
                             " replicates failed (first: " +
                             ens.failure_reason[static_cast<std::size_t>(
                                 std::find(ens.failed.begin(), ens.failed.end(), true) - ens.failed.begin())] +
                             ")");

    const double tail = 0.5 * (1.0 - opt.level);
    const std::size_t g = grid.size();
    ens.median.resize(g);
    ens.lower.resize(g);
    ens.upper.resize(g);
    ens.valid_count.assign(g, 0);
    std::vector<double> vals;
    for (std::size_t j = 0; j < g; ++j) {
        vals.clear();
        for (std::size_t r = 0; r < m; ++r)
            if (!ens.failed[r] && ens.curves[r].probability[j]) vals.push_back(*ens.curves[r].probability[j]);
        ens.valid_count[j] = vals.size();
        if (vals.empty()) continue;
        std::sort(vals.begin(), vals.end());
        ens.median[j] = percentile_lower(vals, 0.5);
        ens.lower[j] = percentile_lower(vals, tail);
        ens.upper[j] = percentile_lower(vals, 1.0 - tail);
    }

    ens.median_ims.resize(m);
    for (std::size_t r = 0; r < m; ++r)
        if (!ens.failed[r]) ens.median_ims[r] = median_im(ens.curves[r]);
    return ens;
}

}  // namespace fragility::uq
