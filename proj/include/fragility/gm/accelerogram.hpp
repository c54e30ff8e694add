#pragma once

#include <cmath>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <ios>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fragility/core/error.hpp"

namespace fragility {

/// Standard gravity used for every g <-> m/s^2 conversion.
inline constexpr double kGravity = 9.81;

/// Uniformly sampled ground acceleration in units of g.
class Accelerogram {
public:
    Accelerogram(double dt, std::vector<double> samples, std::string label = {})
        : dt_(dt), samples_(std::move(samples)), label_(std::move(label)) {
        if (!(dt_ > 0.0) || !std::isfinite(dt_)) throw DataError("accelerogram: time step must be positive");
        if (samples_.empty()) throw DataError("accelerogram: no samples");
        for (double a : samples_)
            if (!std::isfinite(a)) throw DataError("accelerogram: non-finite sample");
    }

    double dt() const noexcept { return dt_; }
    const std::vector<double>& samples() const noexcept { return samples_; }
    std::size_t size() const noexcept { return samples_.size(); }
    const std::string& label() const noexcept { return label_; }
    double duration() const noexcept { return dt_ * static_cast<double>(samples_.size() - 1); }

    Accelerogram scaled(double factor) const {
        std::vector<double> s(samples_);
        for (double& a : s) a *= factor;
        return Accelerogram(dt_, std::move(s), label_);
    }

private:
    double dt_;
    std::vector<double> samples_;
    std::string label_;
};

/// Writes the plain-text motion format:
///   # dt=<seconds> n=<count> label=<text>
/// followed by one acceleration value (g) per line, 9 significant digits.
inline void write_accelerogram(std::ostream& os, const Accelerogram& acc) {
    std::ostringstream buf;
    buf << std::setprecision(9);
    buf << "# dt=" << acc.dt() << " n=" << acc.size() << " label=" << acc.label() << '\n';
    for (double a : acc.samples()) buf << a << '\n';
    os << buf.str();
}

inline void write_accelerogram(const std::string& path, const Accelerogram& acc) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot open '" + path + "' for writing");
    write_accelerogram(os, acc);
    if (!os) throw DataError("write failed for '" + path + "'");
}

}  // namespace fragility
