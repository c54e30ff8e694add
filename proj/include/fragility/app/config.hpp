#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "fragility/core/error.hpp"
#include "fragility/gm/distributions.hpp"
#include "fragility/gm/params.hpp"
#include "fragility/gm/synthesize.hpp"
#include "fragility/im/intensity.hpp"
#include "fragility/nonparam/bandwidth.hpp"
#include "fragility/nonparam/bmcs.hpp"
#include "fragility/structure/shear_frame.hpp"

namespace fragility::app {

enum class Estimator { Mle, Lr, Segmented, Bmcs, Kde };

inline std::string to_string(Estimator e) {
    switch (e) {
    case Estimator::Mle: return "mle";
    case Estimator::Lr: return "lr";
    case Estimator::Segmented: return "segmented";
    case Estimator::Bmcs: return "bmcs";
    case Estimator::Kde: return "kde";
    }
    return "?";
}

inline Estimator parse_estimator(const std::string& s) {
    for (auto e : {Estimator::Mle, Estimator::Lr, Estimator::Segmented, Estimator::Bmcs, Estimator::Kde})
        if (s == to_string(e)) return e;
    throw ConfigError("unknown estimator '" + s + "' (expected mle, lr, segmented, bmcs or kde)");
}

struct StructureSpec {
    std::size_t storeys = 3;
    double storey_mass = 3.0e4;   ///< kg
    double storey_height = 3.0;   ///< m
    double period = 0.61;         ///< s, fundamental
    double damping = 0.02;
    double yield_drift = 0.007;
    double hardening = 0.01;

    structure::ShearFrameModel model() const {
        return structure::uniform_shear_frame(storeys, storey_mass, storey_height, period, damping, yield_drift,
                                              hardening);
    }
};

struct RunConfig {
    std::uint64_t seed = 1;
    std::size_t motions = 100;
    double dt = gm::kDefaultDt;
    std::string output = "out";
    unsigned threads = 1;
    bool write_motions = true;

    // ground motion: sampled from the marginals, or one fixed parameter set
    std::array<gm::MarginalSpec, gm::kGmParamCount> marginals = gm::GMParamDistributions::default_specs();
    std::optional<gm::GMParamDistributions::Matrix> rank_correlation;
    std::optional<gm::GroundMotionParams> fixed_params;

    StructureSpec structure;
    double sa_damping = 0.02;

    std::vector<im::ImKind> im_kinds{im::ImKind::PGA, im::ImKind::Sa};
    std::vector<double> thresholds{0.007, 0.014};
    std::vector<Estimator> estimators{Estimator::Mle, Estimator::Lr, Estimator::Segmented, Estimator::Bmcs,
                                      Estimator::Kde};
    std::size_t grid_points = 60;
    nonparam::BinSpec bin;
    nonparam::BandwidthMode bandwidth = nonparam::BandwidthMode::NormalReference;
    nonparam::MarginalBandwidth marginal_bandwidth = nonparam::MarginalBandwidth::FromJoint;
    bool kde_log_scale = true;

    std::size_t replicates = 100;
    double level = 0.95;
    std::vector<Estimator> bootstrap_estimators{Estimator::Bmcs, Estimator::Kde};

    void validate() const {
        if (motions < 1) throw ConfigError("run.motions must be >= 1");
        if (!(dt > 0.0 && dt <= gm::kMaxDt)) throw ConfigError("run.dt must lie in (0, 0.02]");
        if (thresholds.empty()) throw ConfigError("fit.thresholds must not be empty");
        for (std::size_t i = 0; i < thresholds.size(); ++i) {
            if (!(thresholds[i] > 0.0)) throw ConfigError("fit.thresholds must be > 0");
            if (i > 0 && !(thresholds[i] > thresholds[i - 1]))
                throw ConfigError("fit.thresholds must be strictly increasing");
        }
        if (im_kinds.empty()) throw ConfigError("fit.im must not be empty");
        if (grid_points < 2) throw ConfigError("fit.grid_points must be >= 2");
        bin.validate();
        if (replicates < 2) throw ConfigError("bootstrap.replicates must be >= 2");
        if (!(level > 0.0 && level < 1.0)) throw ConfigError("bootstrap.level must lie in (0, 1)");
        if (!(sa_damping > 0.0 && sa_damping < 1.0)) throw ConfigError("structure.sa_damping must lie in (0, 1)");
        if (fixed_params) fixed_params->validate();
        structure.model().validate();
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

inline double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (trim(v.substr(pos)).empty()) return x;
    } catch (const std::exception&) {
    }
    throw ConfigError("config key '" + key + "': '" + v + "' is not a number");
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        if (!v.empty() && v[0] != '-') {
            const auto x = std::stoull(v, &pos);
            if (trim(v.substr(pos)).empty()) return x;
        }
    } catch (const std::exception&) {
    }
    throw ConfigError("config key '" + key + "': '" + v + "' is not a non-negative integer");
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config key '" + key + "': expected true or false");
}

inline gm::MarginalFamily parse_family(const std::string& key, const std::string& v) {
    if (v == "lognormal") return gm::MarginalFamily::Lognormal;
    if (v == "beta") return gm::MarginalFamily::Beta;
    if (v == "gamma") return gm::MarginalFamily::Gamma;
    if (v == "two_sided_exponential") return gm::MarginalFamily::TwoSidedExponential;
    throw ConfigError("config key '" + key + "': unknown family '" + v + "'");
}

}  // namespace detail

inline constexpr std::array<const char*, gm::kGmParamCount> kGmParamNames{
    "arias_intensity", "effective_duration", "t_mid", "omega_mid_hz", "omega_slope_hz", "bandwidth_zeta"};

/// Reads the INI-style config. Sections and keys:
///   [run]            seed, motions, dt, output, threads, write_motions
///   [ground_motion]  mode = sampled | fixed; for fixed: the six parameter
///                    names; for sampled, optional overrides
///                    <name>.family/.lower/.upper/.mean/.std and
///                    rank_correlation (36 comma-separated values, row major)
///   [structure]      storeys, storey_mass, storey_height, period, damping,
///                    yield_drift, hardening, sa_damping
///   [fit]            im, thresholds, estimators, grid_points, bin_half_width,
///                    bin_min_support, bandwidth, marginal_bandwidth, kde_scale
///   [bootstrap]      replicates, level, estimators
/// Unknown sections or keys are configuration errors.
inline RunConfig parse_config(std::istream& is) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }

    RunConfig c;
    std::set<std::string> used;
    auto get = [&](const std::string& section, const std::string& key) -> std::optional<std::string> {
        const auto full = section + "." + key;
        auto sec = tree.get_child_optional(section);
        if (!sec) return std::nullopt;
        auto v = sec->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
        if (!v) return std::nullopt;
        used.insert(full);
        return detail::trim(*v);
    };
    auto num = [&](const std::string& s, const std::string& k, double& target) {
        if (auto v = get(s, k)) target = detail::parse_double(s + "." + k, *v);
    };
    auto count = [&](const std::string& s, const std::string& k, auto& target) {
        if (auto v = get(s, k)) target = static_cast<std::remove_reference_t<decltype(target)>>(
                                    detail::parse_u64(s + "." + k, *v));
    };

    count("run", "seed", c.seed);
    count("run", "motions", c.motions);
    num("run", "dt", c.dt);
    if (auto v = get("run", "output")) c.output = *v;
    count("run", "threads", c.threads);
    if (auto v = get("run", "write_motions")) c.write_motions = detail::parse_bool("run.write_motions", *v);

    const std::string mode = get("ground_motion", "mode").value_or("sampled");
    if (mode == "fixed") {
        std::array<double, gm::kGmParamCount> v{};
        for (std::size_t i = 0; i < gm::kGmParamCount; ++i) {
            auto s = get("ground_motion", kGmParamNames[i]);
            if (!s) throw ConfigError(std::string("ground_motion.") + kGmParamNames[i] + " is required in fixed mode");
            v[i] = detail::parse_double(kGmParamNames[i], *s);
        }
        c.fixed_params = gm::GroundMotionParams::from_hz(v[0], v[1], v[2], v[3], v[4], v[5]);
    } else if (mode == "sampled") {
        for (std::size_t i = 0; i < gm::kGmParamCount; ++i) {
            const std::string p = kGmParamNames[i];
            auto& m = c.marginals[i];
            if (auto f = get("ground_motion", p + ".family")) m.family = detail::parse_family(p + ".family", *f);
            num("ground_motion", p + ".lower", m.lower);
            num("ground_motion", p + ".upper", m.upper);
            num("ground_motion", p + ".mean", m.mean);
            num("ground_motion", p + ".std", m.std);
        }
        if (auto r = get("ground_motion", "rank_correlation")) {
            const auto items = detail::split_list(*r);
            if (items.size() != 36) throw ConfigError("ground_motion.rank_correlation needs 36 values");
            gm::GMParamDistributions::Matrix mat;
            for (int i = 0; i < 36; ++i)
                mat(i / 6, i % 6) = detail::parse_double("ground_motion.rank_correlation", items[static_cast<std::size_t>(i)]);
            c.rank_correlation = mat;
        }
    } else {
        throw ConfigError("ground_motion.mode must be 'sampled' or 'fixed'");
    }

    count("structure", "storeys", c.structure.storeys);
    num("structure", "storey_mass", c.structure.storey_mass);
    num("structure", "storey_height", c.structure.storey_height);
    num("structure", "period", c.structure.period);
    num("structure", "damping", c.structure.damping);
    num("structure", "yield_drift", c.structure.yield_drift);
    num("structure", "hardening", c.structure.hardening);
    num("structure", "sa_damping", c.sa_damping);

    if (auto v = get("fit", "im")) {
        c.im_kinds.clear();
        for (const auto& s : detail::split_list(*v)) c.im_kinds.push_back(im::parse_im_kind(s));
    }
    if (auto v = get("fit", "thresholds")) {
        c.thresholds.clear();
        for (const auto& s : detail::split_list(*v)) c.thresholds.push_back(detail::parse_double("fit.thresholds", s));
    }
    if (auto v = get("fit", "estimators")) {
        c.estimators.clear();
        for (const auto& s : detail::split_list(*v)) c.estimators.push_back(parse_estimator(s));
    }
    count("fit", "grid_points", c.grid_points);
    num("fit", "bin_half_width", c.bin.half_width);
    count("fit", "bin_min_support", c.bin.min_support);
    if (auto v = get("fit", "bandwidth")) {
        if (*v == "normal_reference") c.bandwidth = nonparam::BandwidthMode::NormalReference;
        else if (*v == "lscv") c.bandwidth = nonparam::BandwidthMode::Lscv;
        else throw ConfigError("fit.bandwidth must be 'normal_reference' or 'lscv'");
    }
    if (auto v = get("fit", "marginal_bandwidth")) {
        if (*v == "joint") c.marginal_bandwidth = nonparam::MarginalBandwidth::FromJoint;
        else if (*v == "independent") c.marginal_bandwidth = nonparam::MarginalBandwidth::Independent;
        else throw ConfigError("fit.marginal_bandwidth must be 'joint' or 'independent'");
    }
    if (auto v = get("fit", "kde_scale")) {
        if (*v == "log") c.kde_log_scale = true;
        else if (*v == "linear") c.kde_log_scale = false;
        else throw ConfigError("fit.kde_scale must be 'log' or 'linear'");
    }

    count("bootstrap", "replicates", c.replicates);
    num("bootstrap", "level", c.level);
    if (auto v = get("bootstrap", "estimators")) {
        c.bootstrap_estimators.clear();
        for (const auto& s : detail::split_list(*v)) c.bootstrap_estimators.push_back(parse_estimator(s));
    }

    for (const auto& [section, sub] : tree) {
        if (sub.empty() && !sub.data().empty()) throw ConfigError("config: key '" + section + "' outside a section");
        for (const auto& [key, val] : sub) {
            (void)val;
            const auto full = section + "." + key;
            if (!used.count(full)) throw ConfigError("config: unknown key '" + full + "'");
        }
    }
    c.validate();
    return c;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot open config '" + path + "'");
    return parse_config(is);
}

/// Canonical text of every setting; hashed into the manifest.
inline std::string canonical_text(const RunConfig& c) {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "seed=" << c.seed << "\nmotions=" << c.motions << "\ndt=" << c.dt << "\nwrite_motions=" << c.write_motions
       << '\n';
    if (c.fixed_params) {
        const auto& p = *c.fixed_params;
        os << "fixed=" << p.arias_intensity << ',' << p.effective_duration << ',' << p.t_mid << ',' << p.omega_mid
           << ',' << p.omega_slope << ',' << p.bandwidth_zeta << '\n';
    } else {
        for (const auto& m : c.marginals)
            os << "marginal=" << static_cast<int>(m.family) << ',' << m.lower << ',' << m.upper << ',' << m.mean << ','
               << m.std << '\n';
        if (c.rank_correlation)
            for (int i = 0; i < 36; ++i) os << (*c.rank_correlation)(i / 6, i % 6) << (i == 35 ? '\n' : ',');
    }
    const auto& s = c.structure;
    os << "structure=" << s.storeys << ',' << s.storey_mass << ',' << s.storey_height << ',' << s.period << ','
       << s.damping << ',' << s.yield_drift << ',' << s.hardening << ',' << c.sa_damping << '\n';
    os << "im=";
    for (auto k : c.im_kinds) os << im::to_string(k) << ',';
    os << "\nthresholds=";
    for (double t : c.thresholds) os << t << ',';
    os << "\nestimators=";
    for (auto e : c.estimators) os << to_string(e) << ',';
    os << "\ngrid=" << c.grid_points << "\nbin=" << c.bin.half_width << ',' << c.bin.min_support
       << "\nbandwidth=" << static_cast<int>(c.bandwidth) << ',' << static_cast<int>(c.marginal_bandwidth) << ','
       << c.kde_log_scale << "\nbootstrap=" << c.replicates << ',' << c.level << ',';
    for (auto e : c.bootstrap_estimators) os << to_string(e) << ',';
    os << '\n';
    return os.str();
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace fragility::app
