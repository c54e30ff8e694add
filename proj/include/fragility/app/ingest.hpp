#pragma once

#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fragility/core/error.hpp"
#include "fragility/gm/accelerogram.hpp"

namespace fragility::app {

enum class Units { G, MetersPerSecond2 };

inline Units parse_units(const std::string& s) {
    if (s == "g") return Units::G;
    if (s == "m/s2") return Units::MetersPerSecond2;
    throw ConfigError("--units must be 'g' or 'm/s2'");
}

inline constexpr double kUniformStepTol = 1e-6;

namespace detail {

inline double parse_number(const std::string& tok, const std::string& where) {
    std::istringstream is(tok);
    is.imbue(std::locale::classic());
    double v = 0.0;
    if (!(is >> v) || !(is >> std::ws).eof()) throw DataError(where + ": '" + tok + "' is not a number");
    return v;
}

inline Accelerogram read_native(std::istream& is, const std::string& header, const std::string& path) {
    // # dt=<s> n=<count> label=<text>
    std::optional<double> dt;
    std::optional<std::size_t> n;
    std::string label;
    const auto lpos = header.find("label=");
    if (lpos != std::string::npos) {
        label = header.substr(lpos + 6);
        while (!label.empty() && (label.back() == '\r' || label.back() == ' ')) label.pop_back();
    }
    std::istringstream hs(header.substr(1, lpos == std::string::npos ? std::string::npos : lpos - 1));
    std::string tok;
    while (hs >> tok) {
        if (tok.rfind("dt=", 0) == 0) dt = parse_number(tok.substr(3), path + " header");
        else if (tok.rfind("n=", 0) == 0) n = static_cast<std::size_t>(parse_number(tok.substr(2), path + " header"));
    }
    if (!dt) throw DataError(path + ": header lacks dt=");
    std::vector<double> samples;
    if (n) samples.reserve(*n);
    std::string line;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line == "\r" || line[0] == '#') continue;
        samples.push_back(parse_number(line, path + " line " + std::to_string(lineno)));
    }
    if (n && samples.size() != *n)
        throw DataError(path + ": header announces " + std::to_string(*n) + " samples, found " +
                        std::to_string(samples.size()));
    return Accelerogram(*dt, std::move(samples), label);
}

inline Accelerogram read_two_column(std::istream& is, const std::string& first, const std::string& path,
                                    double divisor) {
    std::vector<double> t, a;
    auto take = [&](const std::string& line, std::size_t lineno) {
        std::string s = line;
        for (char& ch : s)
            if (ch == ',' || ch == '\t' || ch == ';') ch = ' ';
        std::istringstream ls(s);
        std::string c0, c1, extra;
        if (!(ls >> c0 >> c1) || (ls >> extra))
            throw DataError(path + " line " + std::to_string(lineno) + ": expected two columns (time, acceleration)");
        const auto where = path + " line " + std::to_string(lineno);
        t.push_back(parse_number(c0, where));
        a.push_back(parse_number(c1, where) / divisor);
    };
    std::size_t lineno = 1;
    if (!first.empty() && first != "\r" && first[0] != '#') take(first, lineno);
    std::string line;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line == "\r" || line[0] == '#') continue;
        take(line, lineno);
    }
    if (t.size() < 2) throw DataError(path + ": need at least two samples to infer the time step");
    const double dt = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
    if (!(dt > 0.0)) throw DataError(path + ": time column must increase");
    for (std::size_t i = 1; i < t.size(); ++i)
        if (std::abs((t[i] - t[i - 1]) - dt) > kUniformStepTol * dt)
            throw DataError(path + ": non-uniform time step at line " + std::to_string(i + 1));
    return Accelerogram(dt, std::move(a), path);
}

}  // namespace detail

/// Reads a motion file: the native "# dt=... n=... label=..." format (always
/// in g) or two columns (time, acceleration) whose unit must be stated.
inline Accelerogram ingest_recorded(const std::string& path, std::optional<Units> units = std::nullopt) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open motion file '" + path + "'");
    std::string first;
    if (!std::getline(is, first)) throw DataError("motion file '" + path + "' is empty");
    if (first.rfind("# dt=", 0) == 0) {
        if (units && *units != Units::G) throw ConfigError(path + ": native motion files are in g; use --units g");
        return detail::read_native(is, first, path);
    }
    if (!units) throw ConfigError(path + ": two-column motion file needs --units g or --units m/s2");
    return detail::read_two_column(is, first, path, *units == Units::G ? 1.0 : kGravity);
}

}  // namespace fragility::app
