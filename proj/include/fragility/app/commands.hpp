#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fragility/app/config.hpp"
#include "fragility/app/csv.hpp"
#include "fragility/app/ingest.hpp"
#include "fragility/app/stages.hpp"
#include "fragility/app/svg.hpp"
#include "fragility/uq/bootstrap.hpp"

namespace fragility::app {

inline constexpr const char* kToolVersion = "1.0.0";

struct CliOptions {
    std::optional<std::string> config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<unsigned> threads;
    std::optional<Units> units;
    bool plot = false;
    std::vector<std::string> inputs;  ///< motion files/directories or a records CSV
};

/// Reproducibility record of one command run.
class Manifest {
public:
    Manifest(std::string command, const RunConfig& cfg)
        : command_(std::move(command)), hash_(fnv1a(canonical_text(cfg))), seed_(cfg.seed) {}

    void warn(std::string w) {
        std::lock_guard lock(mutex_);
        warnings_.push_back(std::move(w));
    }
    void count(const std::string& key, std::size_t v) { counts_[key] = v; }
    void failure(std::string id, std::string reason) { failures_.emplace_back(std::move(id), std::move(reason)); }

    template <class F>
    auto timed(const std::string& stage, F&& f) {
        const auto t0 = std::chrono::steady_clock::now();
        auto finish = [&] {
            timings_.emplace_back(stage, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        };
        if constexpr (std::is_void_v<decltype(f())>) {
            f();
            finish();
        } else {
            auto r = f();
            finish();
            return r;
        }
    }

    const std::vector<std::string>& warnings() const { return warnings_; }

    std::string config_hash() const {
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash_));
        return buf;
    }

    void write(const std::filesystem::path& path) const {
        nlohmann::ordered_json j;
        j["command"] = command_;
        j["tool_version"] = kToolVersion;
        j["config_hash"] = config_hash();
        j["seed"] = seed_;
        auto& t = j["timings_s"] = nlohmann::ordered_json::object();
        for (const auto& [k, v] : timings_) t[k] = v;
        j["counts"] = counts_;
        j["warnings"] = warnings_;
        auto& f = j["failures"] = nlohmann::ordered_json::array();
        for (const auto& [id, why] : failures_) f.push_back({{"motion_id", id}, {"reason", why}});
        std::ofstream os(path, std::ios::binary);
        if (!os) throw DataError("cannot write manifest '" + path.string() + "'");
        os << j.dump(2) << '\n';
    }

private:
    std::string command_;
    std::uint64_t hash_;
    std::uint64_t seed_;
    std::vector<std::pair<std::string, double>> timings_;
    std::map<std::string, std::size_t> counts_;
    std::vector<std::string> warnings_;
    std::vector<std::pair<std::string, std::string>> failures_;
    std::mutex mutex_;
};

inline RunConfig resolve_config(const CliOptions& opt) {
    RunConfig cfg = opt.config ? load_config(*opt.config) : RunConfig{};
    if (opt.seed) cfg.seed = *opt.seed;
    if (opt.out) cfg.output = *opt.out;
    if (opt.threads) cfg.threads = *opt.threads;
    cfg.validate();
    return cfg;
}

inline std::string threshold_tag(double t) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", t);
    return buf;
}

namespace fs = std::filesystem;

inline void ensure_dir(const fs::path& p) {
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) throw DataError("cannot create directory '" + p.string() + "': " + ec.message());
}

inline const std::vector<std::string>& summary_header() {
    static const std::vector<std::string> h{
        "motion_id",      "attempts",       "arias_intensity_sg", "effective_duration_s", "t_mid_s",
        "omega_mid_hz",   "omega_slope_hz", "bandwidth_zeta",     "frequency_clipped",    "arias_emp_sg",
        "d595_emp_s",     "t_mid_emp_s"};
    return h;
}

inline void write_summary(const fs::path& path, const std::vector<MotionSummary>& rows) {
    CsvWriter w(path.string(), summary_header());
    for (const auto& m : rows) {
        const auto& p = m.params;
        w.write(m.id, m.attempts, p.arias_intensity, p.effective_duration, p.t_mid,
                p.omega_mid / (2.0 * std::numbers::pi), p.omega_slope / (2.0 * std::numbers::pi), p.bandwidth_zeta,
                m.frequency_clipped ? 1 : 0, m.arias, m.d595, m.t_mid);
    }
    w.close();
}

inline void note_synthesis(Manifest& man, const SyntheticSet& set) {
    man.count("motions", set.summaries.size());
    man.count("redraws", set.redraws);
    man.count("frequency_clipped", set.clipped);
    for (const auto& m : set.summaries) {
        if (m.frequency_clipped)
            man.warn(m.id + ": predominant frequency clipped at the lower bound within the record");
        if (m.attempts > 1)
            man.warn(m.id + ": parameter set re-drawn " + std::to_string(m.attempts - 1) + " time(s)");
    }
}

/// `generate`: motion files plus the per-motion summary table.
inline int cmd_generate(const RunConfig& cfg, Manifest& man) {
    const fs::path out(cfg.output);
    const auto dir = out / "motions";
    ensure_dir(dir);
    auto set = man.timed("generate", [&] {
        return synthesize_records(
            cfg, cfg.threads,
            [&](const DrawnMotion& d) { write_accelerogram((dir / (d.summary.id + ".txt")).string(), d.motion); },
            false);
    });
    write_summary(out / "gm_summary.csv", set.summaries);
    note_synthesis(man, set);
    return 0;
}

inline std::vector<fs::path> collect_motion_files(const std::vector<std::string>& inputs) {
    std::vector<fs::path> files;
    for (const auto& in : inputs) {
        const fs::path p(in);
        if (fs::is_directory(p)) {
            std::vector<fs::path> sub;
            for (const auto& e : fs::directory_iterator(p))
                if (e.is_regular_file()) sub.push_back(e.path());
            std::sort(sub.begin(), sub.end());
            files.insert(files.end(), sub.begin(), sub.end());
        } else {
            files.push_back(p);
        }
    }
    return files;
}

/// `simulate`: demand records for every readable motion; failures are listed
/// in the manifest and left out of the table.
inline int cmd_simulate(const RunConfig& cfg, const std::vector<std::string>& inputs, std::optional<Units> units,
                        Manifest& man) {
    const fs::path out(cfg.output);
    ensure_dir(out);
    const auto files = collect_motion_files(inputs.empty() ? std::vector<std::string>{(out / "motions").string()}
                                                           : inputs);
    if (files.empty()) throw DataError("simulate: no motion files found");
    const auto ctx = StructureContext::from(cfg);
    std::vector<std::optional<im::DemandRecord>> recs(files.size());
    std::vector<std::string> errors(files.size());
    man.timed("simulate", [&] {
        parallel_for(files.size(), cfg.threads, [&](std::size_t i) {
            try {
                const auto acc = ingest_recorded(files[i].string(), units);
                const auto id = acc.label().empty() || acc.label() == files[i].string() ? files[i].stem().string()
                                                                                        : acc.label();
                recs[i] = analyze_motion(ctx, acc, id);
            } catch (const ConfigError&) {
                throw;
            } catch (const Error& e) {
                errors[i] = e.what();
            }
        });
    });
    std::vector<im::DemandRecord> rows;
    for (std::size_t i = 0; i < files.size(); ++i) {
        if (recs[i]) rows.push_back(std::move(*recs[i]));
        else man.failure(files[i].stem().string(), errors[i]);
    }
    man.count("motions", files.size());
    man.count("records", rows.size());
    man.count("failures", files.size() - rows.size());
    if (rows.empty()) throw DataError("simulate: every analysis failed");
    write_records((out / "records.csv").string(), rows);
    return 0;
}

inline void write_curve(const fs::path& path, const FragilityCurve& c) {
    CsvWriter w(path.string(), {"im_g", "probability", "support_count"});
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (c.support.size() == c.size())
            w.write(c.im_grid[i], c.probability[i], c.support[i]);
        else
            w.write(c.im_grid[i], c.probability[i], "");
    }
    w.close();
}

inline const std::vector<std::string>& parameters_header() {
    static const std::vector<std::string> h{
        "estimator", "im",     "threshold", "alpha_g",    "beta",  "slope_a", "intercept_b", "zeta",
        "r2",        "break_g", "slope_a2", "intercept_b2", "zeta2", "r2_2",    "log_likelihood", "status"};
    return h;
}

struct FitContext {
    std::vector<DemandPoint> data;
    std::vector<double> grid;
    std::optional<nonparam::FragilityBandwidths> bandwidths;
};

/// Shared IM grid and (when KDE is used) bandwidths for one IM kind.
inline FitContext prepare_fit(const RunConfig& cfg, const std::vector<im::DemandRecord>& records, im::ImKind kind,
                              bool need_kde, Manifest& man) {
    FitContext fc;
    fc.data = project(records, kind);
    fc.grid = default_im_grid(fc.data, cfg.grid_points);
    if (need_kde) {
        try {
            fc.bandwidths = nonparam::fragility_bandwidths(fc.data, cfg.kde_log_scale, cfg.bandwidth,
                                                           cfg.marginal_bandwidth);
            if (fc.bandwidths->fallback)
                man.warn("kde/" + im::to_string(kind) + ": LSCV search failed; normal-reference bandwidth used");
        } catch (const Error& e) {
            man.warn("kde/" + im::to_string(kind) + ": bandwidth selection failed: " + e.what());
        }
    }
    return fc;
}

inline bool uses(const std::vector<Estimator>& v, Estimator e) { return std::find(v.begin(), v.end(), e) != v.end(); }

/// `fit`: one curve table per (estimator, IM, threshold) on a grid shared by
/// all estimators of that IM, plus a parameters table for the parametric ones.
/// A failing combination is reported and skipped.
inline int cmd_fit(const RunConfig& cfg, const std::vector<im::DemandRecord>& records, bool plot, Manifest& man) {
    const fs::path dir = fs::path(cfg.output) / "fit";
    ensure_dir(dir);
    CsvWriter params(dir.string() + "/parameters.csv", parameters_header());
    std::size_t failed = 0;
    man.timed("fit", [&] {
        for (auto kind : cfg.im_kinds) {
            const auto fc = prepare_fit(cfg, records, kind, uses(cfg.estimators, Estimator::Kde), man);
            for (double t : cfg.thresholds) {
                SvgChart chart;
                chart.title = "Fragility, " + im::to_string(kind) + ", threshold " + threshold_tag(t);
                chart.x_label = im::to_string(kind) + " (g)";
                for (auto est : cfg.estimators) {
                    const auto name = to_string(est) + "_" + im::to_string(kind) + "_" + threshold_tag(t);
                    try {
                        if (est == Estimator::Kde && !fc.bandwidths) throw DataError("no usable bandwidths");
                        auto r = run_estimator(cfg, est, fc.data, t, fc.grid, kind,
                                               fc.bandwidths ? &*fc.bandwidths : nullptr);
                        for (auto& w : r.warnings) man.warn(std::move(w));
                        write_curve(dir / ("curve_" + name + ".csv"), r.curve);
                        if (r.params) {
                            const auto& p = *r.params;
                            params.write(p.estimator, im::to_string(p.im_kind), p.threshold, p.alpha, p.beta, p.slope,
                                         p.intercept, p.zeta, p.r2, p.break_im, p.slope2, p.intercept2, p.zeta2,
                                         p.r2_2, p.log_likelihood, p.status);
                        }
                        chart.series.push_back({to_string(est), r.curve.im_grid, r.curve.probability, {}, {}});
                    } catch (const Error& e) {
                        ++failed;
                        man.warn(name + ": " + e.what());
                        std::cerr << "fit " << name << ": " << e.what() << '\n';
                    }
                }
                if (plot && !chart.series.empty())
                    write_svg((dir / ("plot_" + im::to_string(kind) + "_" + threshold_tag(t) + ".svg")).string(),
                              chart);
            }
        }
    });
    params.close();
    man.count("records", records.size());
    man.count("fit_failures", failed);
    return 0;
}

/// `bootstrap`: percentile bands and median-IM samples for each configured
/// estimator. Grid and bandwidths come from the original records and stay
/// fixed across replicates.
inline int cmd_bootstrap(const RunConfig& cfg, const std::vector<im::DemandRecord>& records, bool plot,
                         Manifest& man) {
    const fs::path dir = fs::path(cfg.output) / "bootstrap";
    ensure_dir(dir);
    CsvWriter summary(dir.string() + "/summary.csv",
                      {"estimator", "im", "threshold", "replicates", "failures", "valid_medians", "median_im_logstd",
                       "original_median_im_g"});
    uq::BootstrapOptions bo;
    bo.replicates = cfg.replicates;
    bo.level = cfg.level;
    bo.threads = cfg.threads;
    std::uint64_t combo = 0;
    man.timed("bootstrap", [&] {
        for (auto kind : cfg.im_kinds) {
            const auto fc = prepare_fit(cfg, records, kind, uses(cfg.bootstrap_estimators, Estimator::Kde), man);
            for (double t : cfg.thresholds) {
                SvgChart chart;
                chart.title = "Bootstrap, " + im::to_string(kind) + ", threshold " + threshold_tag(t);
                chart.x_label = im::to_string(kind) + " (g)";
                for (auto est : cfg.bootstrap_estimators) {
                    const auto base = bootstrap_root(cfg.seed).child(combo++);
                    const auto name = to_string(est) + "_" + im::to_string(kind) + "_" + threshold_tag(t);
                    if (est == Estimator::Kde && !fc.bandwidths) {
                        man.warn(name + ": skipped, no usable bandwidths");
                        continue;
                    }
                    const auto f = frozen_estimator(cfg, est, t, fc.grid, kind, fc.bandwidths);
                    const auto original = f(fc.data);
                    const auto ens = uq::bootstrap_curves(fc.data, f, fc.grid, base, bo, to_string(est));
                    for (std::size_t r = 0; r < ens.failed.size(); ++r)
                        if (ens.failed[r])
                            man.warn(name + ": replicate " + std::to_string(r) + " failed: " + ens.failure_reason[r]);

                    CsvWriter band((dir / ("band_" + name + ".csv")).string(),
                                   {"im_g", "original", "median", "lower", "upper", "valid_count"});
                    for (std::size_t j = 0; j < fc.grid.size(); ++j)
                        band.write(fc.grid[j], original.probability[j], ens.median[j], ens.lower[j], ens.upper[j],
                                   ens.valid_count[j]);
                    band.close();

                    CsvWriter med((dir / ("median_im_" + name + ".csv")).string(),
                                  {"replicate", "median_im_g", "status"});
                    std::size_t valid = 0;
                    for (std::size_t r = 0; r < ens.median_ims.size(); ++r) {
                        const char* status = ens.failed[r] ? "failed" : (ens.median_ims[r] ? "ok" : "missing");
                        if (ens.median_ims[r]) ++valid;
                        med.write(r, ens.median_ims[r], status);
                    }
                    med.close();

                    std::optional<double> logstd;
                    try {
                        logstd = ens.median_im_stats().log_std;
                    } catch (const Error& e) {
                        man.warn(name + ": " + e.what());
                    }
                    summary.write(to_string(est), im::to_string(kind), t, cfg.replicates, ens.failures(), valid,
                                  logstd, uq::median_im(original));
                    chart.series.push_back({to_string(est), fc.grid, ens.median, ens.lower, ens.upper});
                }
                if (plot && !chart.series.empty())
                    write_svg((dir / ("plot_" + im::to_string(kind) + "_" + threshold_tag(t) + ".svg")).string(),
                              chart);
            }
        }
    });
    summary.close();
    return 0;
}

inline std::vector<im::DemandRecord> load_records(const RunConfig& cfg, const std::vector<std::string>& inputs) {
    if (inputs.size() > 1) throw ConfigError("expected a single records CSV");
    const auto path = inputs.empty() ? (fs::path(cfg.output) / "records.csv").string() : inputs.front();
    return read_records(path);
}

/// `pipeline`: generate, simulate, fit and bootstrap in one run. Motions are
/// analysed in memory; motion files are written only when run.write_motions.
inline int cmd_pipeline(const RunConfig& cfg, bool plot, Manifest& man) {
    const fs::path out(cfg.output);
    ensure_dir(out);
    if (cfg.write_motions) ensure_dir(out / "motions");
    auto set = man.timed("generate+simulate", [&] {
        std::function<void(const DrawnMotion&)> sink;
        if (cfg.write_motions)
            sink = [&](const DrawnMotion& d) {
                write_accelerogram((out / "motions" / (d.summary.id + ".txt")).string(), d.motion);
            };
        return synthesize_records(cfg, cfg.threads, sink, true);
    });
    note_synthesis(man, set);
    for (const auto& f : set.failures) man.failure(f.motion_id, f.reason);
    man.count("failures", set.failures.size());
    write_summary(out / "gm_summary.csv", set.summaries);
    if (set.records.empty()) throw DataError("pipeline: every analysis failed");
    write_records((out / "records.csv").string(), set.records);
    cmd_fit(cfg, set.records, plot, man);
    cmd_bootstrap(cfg, set.records, plot, man);
    return 0;
}

inline int exit_code(const Error& e) { return static_cast<int>(e.kind()); }

/// Dispatches a subcommand and writes its manifest.
inline int run_command(const std::string& command, const CliOptions& opt) {
    const auto cfg = resolve_config(opt);
    Manifest man(command, cfg);
    ensure_dir(cfg.output);
    int rc = 0;
    if (command == "generate") {
        rc = cmd_generate(cfg, man);
    } else if (command == "simulate") {
        rc = cmd_simulate(cfg, opt.inputs, opt.units, man);
    } else if (command == "fit") {
        rc = cmd_fit(cfg, load_records(cfg, opt.inputs), opt.plot, man);
    } else if (command == "bootstrap") {
        rc = cmd_bootstrap(cfg, load_records(cfg, opt.inputs), opt.plot, man);
    } else if (command == "pipeline") {
        rc = cmd_pipeline(cfg, opt.plot, man);
    } else {
        throw ConfigError("unknown command '" + command + "'");
    }
    man.write(fs::path(cfg.output) / ("manifest_" + command + ".json"));
    return rc;
}

}  // namespace fragility::app
