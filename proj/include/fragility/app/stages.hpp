#pragma once

#include <cstdio>
#include <functional>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fragility/app/config.hpp"
#include "fragility/core/error.hpp"
#include "fragility/core/parallel.hpp"
#include "fragility/core/random_stream.hpp"
#include "fragility/gm/distributions.hpp"
#include "fragility/gm/modulator.hpp"
#include "fragility/gm/synthesize.hpp"
#include "fragility/im/demand_point.hpp"
#include "fragility/im/intensity.hpp"
#include "fragility/nonparam/bandwidth.hpp"
#include "fragility/nonparam/bmcs.hpp"
#include "fragility/nonparam/fragility_curve.hpp"
#include "fragility/nonparam/kde.hpp"
#include "fragility/param/linear_demand.hpp"
#include "fragility/param/lognormal.hpp"
#include "fragility/param/mle.hpp"
#include "fragility/param/segmented.hpp"
#include "fragility/structure/newmark.hpp"
#include "fragility/structure/shear_frame.hpp"

namespace fragility::app {

inline constexpr unsigned kMaxDrawAttempts = 10;

/// Root streams: motions draw from (seed, 0), bootstrap from (seed, 1).
inline RandomStream motion_root(std::uint64_t seed) { return RandomStream(seed, 0); }
inline RandomStream bootstrap_root(std::uint64_t seed) { return RandomStream(seed, 1); }

inline std::string motion_id(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "m%06zu", i);
    return buf;
}

struct MotionSummary {
    std::string id;
    gm::GroundMotionParams params{};
    unsigned attempts = 0;
    bool frequency_clipped = false;
    double arias = 0.0;  ///< empirical, s*g
    double d595 = 0.0;   ///< empirical, s
    double t_mid = 0.0;  ///< empirical, s
};

struct DrawnMotion {
    MotionSummary summary;
    Accelerogram motion;
};

/// Motion i: parameters from child(2a) and noise from child(2a+1) of the
/// motion's stream on attempt a. Sampled parameter sets whose descriptors
/// admit no modulating function are re-drawn.
inline DrawnMotion draw_motion(const RunConfig& cfg, const gm::GMParamDistributions& dists, std::size_t i) {
    const auto stream = motion_root(cfg.seed).child(i);
    const auto id = motion_id(i);
    std::string last_reason;
    for (unsigned a = 0; a < kMaxDrawAttempts; ++a) {
        const auto params = cfg.fixed_params ? *cfg.fixed_params : gm::sample_gm_params(dists, stream.child(2 * a));
        try {
            auto s = gm::synthesize_detailed(params, stream.child(2 * a + 1), cfg.dt, id);
            MotionSummary m;
            m.id = id;
            m.params = params;
            m.attempts = a + 1;
            m.frequency_clipped = s.frequency_clipped;
            m.arias = im::arias_intensity(s.motion);
            if (m.arias > 0.0) {
                m.d595 = im::d595(s.motion);
                m.t_mid = im::t_alpha(s.motion, 0.45);
            }
            return DrawnMotion{std::move(m), std::move(s.motion)};
        } catch (const gm::InfeasibleDescriptorError& e) {
            if (cfg.fixed_params) throw;
            last_reason = e.what();
        }
    }
    throw ConfigError(id + ": no feasible parameter set in " + std::to_string(kMaxDrawAttempts) +
                      " draws (last: " + last_reason + ")");
}

struct StructureContext {
    structure::ShearFrameModel model;
    double fundamental_period = 0.0;
    double sa_damping = 0.02;

    static StructureContext from(const RunConfig& cfg) {
        StructureContext c;
        c.model = cfg.structure.model();
        c.model.validate();
        c.fundamental_period = structure::modal_analysis(c.model).periods.front();
        c.sa_damping = cfg.sa_damping;
        return c;
    }
};

inline im::DemandRecord analyze_motion(const StructureContext& ctx, const Accelerogram& acc, std::string id) {
    im::DemandRecord r;
    r.motion_id = std::move(id);
    r.im = im::extract_ims(acc, ctx.fundamental_period, ctx.sa_damping);
    const auto resp = structure::integrate(ctx.model, acc);
    r.delta = structure::max_interstorey_drift(resp, ctx.model.heights);
    return r;
}

struct AnalysisFailure {
    std::string motion_id;
    std::string reason;
};

struct SyntheticSet {
    std::vector<MotionSummary> summaries;
    std::vector<im::DemandRecord> records;  ///< in motion order, failed analyses excluded
    std::vector<AnalysisFailure> failures;
    std::size_t clipped = 0;
    std::size_t redraws = 0;
};

/// Draws and analyses cfg.motions motions. `sink` (if set) sees each motion
/// before it is discarded; it may be called concurrently for different motions.
inline SyntheticSet synthesize_records(const RunConfig& cfg, unsigned threads,
                                       const std::function<void(const DrawnMotion&)>& sink = {},
                                       bool analyze = true) {
    const gm::GMParamDistributions dists(cfg.marginals, cfg.rank_correlation);
    std::optional<StructureContext> ctx;
    if (analyze) ctx = StructureContext::from(cfg);
    const std::size_t n = cfg.motions;
    std::vector<MotionSummary> summaries(n);
    std::vector<std::optional<im::DemandRecord>> records(n);
    std::vector<std::optional<AnalysisFailure>> failures(n);
    parallel_for(n, threads, [&](std::size_t i) {
        auto d = draw_motion(cfg, dists, i);
        if (sink) sink(d);
        if (analyze) {
            try {
                records[i] = analyze_motion(*ctx, d.motion, d.summary.id);
            } catch (const NumericalError& e) {
                failures[i] = AnalysisFailure{d.summary.id, e.what()};
            } catch (const DataError& e) {
                failures[i] = AnalysisFailure{d.summary.id, e.what()};
            }
        }
        summaries[i] = std::move(d.summary);
    });
    SyntheticSet out;
    out.summaries = std::move(summaries);
    for (std::size_t i = 0; i < n; ++i) {
        if (records[i]) out.records.push_back(std::move(*records[i]));
        if (failures[i]) out.failures.push_back(std::move(*failures[i]));
        if (out.summaries[i].frequency_clipped) ++out.clipped;
        out.redraws += out.summaries[i].attempts - 1;
    }
    return out;
}

/// One row of the parameters table; unused fields stay empty.
struct ParamRow {
    std::string estimator;
    im::ImKind im_kind = im::ImKind::PGA;
    double threshold = 0.0;
    std::optional<double> alpha, beta;
    std::optional<double> slope, intercept, zeta, r2;
    std::optional<double> break_im, slope2, intercept2, zeta2, r2_2;
    std::optional<double> log_likelihood;
    std::string status = "ok";
};

struct Estimate {
    FragilityCurve curve;
    std::optional<ParamRow> params;  ///< parametric estimators only
    std::vector<std::string> warnings;
};

/// Runs one estimator on one (IM kind, threshold) combination. For KDE the
/// bandwidths must be supplied (they depend on the data, not the threshold).
inline Estimate run_estimator(const RunConfig& cfg, Estimator est, std::span<const DemandPoint> data, double delta_o,
                              std::span<const double> grid, im::ImKind kind,
                              const nonparam::FragilityBandwidths* bw = nullptr) {
    Estimate out;
    const auto tag = to_string(est);
    const auto where = tag + "/" + im::to_string(kind) + "/" + std::to_string(delta_o);
    auto base_row = [&] {
        ParamRow r;
        r.estimator = tag;
        r.im_kind = kind;
        r.threshold = delta_o;
        return r;
    };
    switch (est) {
    case Estimator::Mle: {
        const auto f = param::fit_mle(data, delta_o, kind);
        out.curve = param::to_curve(f.curve, grid, tag);
        auto r = base_row();
        r.alpha = f.curve.alpha;
        r.beta = f.curve.beta;
        r.log_likelihood = f.log_likelihood;
        if (f.separation) {
            r.status = "separation";
            out.warnings.push_back(where + ": failures and survivals are (nearly) separated; beta collapsed");
        }
        out.params = r;
        break;
    }
    case Estimator::Lr: {
        const auto f = param::fit_linear_demand(data);
        const auto c = param::lr_to_fragility(f, delta_o, kind);
        out.curve = param::to_curve(c, grid, tag);
        auto r = base_row();
        r.alpha = c.alpha;
        r.beta = c.beta;
        r.slope = f.slope;
        r.intercept = f.intercept;
        r.zeta = f.zeta_res;
        r.r2 = f.r2;
        out.params = r;
        break;
    }
    case Estimator::Segmented: {
        const auto f = param::fit_segmented(data);
        out.curve = param::segmented_curve(f, delta_o, grid, kind);
        auto r = base_row();
        r.break_im = f.break_im;
        r.slope = f.segments[0].slope;
        r.intercept = f.segments[0].intercept;
        r.zeta = f.segments[0].zeta_res;
        r.r2 = f.segments[0].r2;
        r.slope2 = f.segments[1].slope;
        r.intercept2 = f.segments[1].intercept;
        r.zeta2 = f.segments[1].zeta_res;
        r.r2_2 = f.segments[1].r2;
        if (f.status == param::SegmentStatus::EffectivelyLinear) {
            r.status = "effectively_linear";
        } else if (f.status == param::SegmentStatus::FallbackLinear) {
            r.status = "fallback_linear";
            out.warnings.push_back(where + ": too few points around every break; single line used");
        }
        out.params = r;
        break;
    }
    case Estimator::Bmcs:
        out.curve = nonparam::bmcs_fragility(data, delta_o, grid, cfg.bin, kind);
        break;
    case Estimator::Kde: {
        if (!bw) throw ConfigError("kde estimator needs bandwidths");
        out.curve = nonparam::kde_fragility(data, delta_o, grid, bw->h_im, bw->H, cfg.kde_log_scale, kind);
        break;
    }
    }
    out.curve.threshold = delta_o;
    out.curve.im_kind = kind;
    return out;
}

/// Estimator as a function of the records alone, with every data-derived
/// hyperparameter (grid, bandwidths) frozen; used for bootstrap replicates.
inline std::function<FragilityCurve(std::span<const DemandPoint>)> frozen_estimator(
    const RunConfig& cfg, Estimator est, double delta_o, std::vector<double> grid, im::ImKind kind,
    std::optional<nonparam::FragilityBandwidths> bw) {
    return [=](std::span<const DemandPoint> data) {
        return run_estimator(cfg, est, data, delta_o, grid, kind, bw ? &*bw : nullptr).curve;
    };
}

}  // namespace fragility::app
