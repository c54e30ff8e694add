#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "fragility/core/error.hpp"
#include "fragility/gm/accelerogram.hpp"
#include "fragility/structure/newmark.hpp"

namespace fragility::im {

enum class ImKind { PGA, Sa, Psa };

inline std::string to_string(ImKind kind) {
    switch (kind) {
    case ImKind::PGA: return "pga";
    case ImKind::Sa: return "sa";
    case ImKind::Psa: return "psa";
    }
    return "?";
}

inline ImKind parse_im_kind(const std::string& s) {
    if (s == "pga") return ImKind::PGA;
    if (s == "sa") return ImKind::Sa;
    if (s == "psa") return ImKind::Psa;
    throw ConfigError("unknown intensity measure '" + s + "' (expected pga, sa or psa)");
}

struct IMRecord {
    double pga = 0.0;        ///< g
    double sa = 0.0;         ///< g
    double psa = 0.0;        ///< g
    double arias = 0.0;      ///< s*g
    double d595 = 0.0;       ///< s
    double t_mid_emp = 0.0;  ///< s

    double get(ImKind kind) const {
        switch (kind) {
        case ImKind::PGA: return pga;
        case ImKind::Sa: return sa;
        case ImKind::Psa: return psa;
        }
        return 0.0;
    }
};

struct DemandRecord {
    std::string motion_id;
    IMRecord im;
    double delta = 0.0;  ///< maximal inter-storey drift ratio
};

inline double pga(const Accelerogram& acc) {
    double peak = 0.0;
    for (double a : acc.samples()) peak = std::max(peak, std::abs(a));
    return peak;
}

/// Cumulative (pi/2) * integral of a^2 by the trapezoidal rule, a in g,
/// giving s*g. Element k is the value at t_k.
inline std::vector<double> cumulative_arias(const Accelerogram& acc) {
    const auto& a = acc.samples();
    std::vector<double> out(a.size(), 0.0);
    const double c = 0.5 * std::numbers::pi * 0.5 * acc.dt();
    for (std::size_t k = 1; k < a.size(); ++k) out[k] = out[k - 1] + c * (a[k - 1] * a[k - 1] + a[k] * a[k]);
    return out;
}

inline double arias_intensity(const Accelerogram& acc) { return cumulative_arias(acc).back(); }

/// First time at which the cumulative Arias intensity reaches alpha * total,
/// linearly interpolated between samples.
inline double t_alpha(const Accelerogram& acc, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("t_alpha: alpha must lie in (0, 1)");
    const auto cum = cumulative_arias(acc);
    const double total = cum.back();
    if (!(total > 0.0)) throw DataError("t_alpha: record carries no energy; descriptor undefined");
    const double target = alpha * total;
    const auto it = std::lower_bound(cum.begin(), cum.end(), target);
    const auto k = static_cast<std::size_t>(it - cum.begin());
    if (k == 0) return 0.0;
    const double frac = (target - cum[k - 1]) / (cum[k] - cum[k - 1]);
    return (static_cast<double>(k - 1) + frac) * acc.dt();
}

inline double d595(const Accelerogram& acc) { return t_alpha(acc, 0.95) - t_alpha(acc, 0.05); }

inline double spectral_acceleration(const Accelerogram& acc, double period, double zeta) {
    const auto r = structure::linear_sdof_response(period, zeta, acc);
    double peak = 0.0;
    for (double x : r.acceleration[0]) peak = std::max(peak, std::abs(x));
    return peak;
}

inline double pseudo_spectral_acceleration(const Accelerogram& acc, double period, double zeta) {
    const auto r = structure::linear_sdof_response(period, zeta, acc);
    double peak = 0.0;
    for (double x : r.displacement[0]) peak = std::max(peak, std::abs(x));
    const double w = 2.0 * std::numbers::pi / period;
    return w * w * peak / kGravity;
}

/// All intensity measures and descriptors of one record; the time
/// descriptors are 0 for a silent record.
inline IMRecord extract_ims(const Accelerogram& acc, double period, double zeta) {
    IMRecord r;
    r.pga = pga(acc);
    const auto resp = structure::linear_sdof_response(period, zeta, acc);
    for (double x : resp.acceleration[0]) r.sa = std::max(r.sa, std::abs(x));
    double umax = 0.0;
    for (double x : resp.displacement[0]) umax = std::max(umax, std::abs(x));
    const double w = 2.0 * std::numbers::pi / period;
    r.psa = w * w * umax / kGravity;
    r.arias = arias_intensity(acc);
    if (r.arias > 0.0) {
        r.d595 = d595(acc);
        r.t_mid_emp = t_alpha(acc, 0.45);
    }
    return r;
}

}  // namespace fragility::im
