#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fragility/core/error.hpp"

namespace fragility::app {

struct SvgSeries {
    std::string name;
    std::vector<double> x;
    std::vector<std::optional<double>> y;
    std::vector<std::optional<double>> lower;  ///< optional band, same length as x
    std::vector<std::optional<double>> upper;
};

struct SvgChart {
    std::string title;
    std::string x_label = "IM (g)";
    std::string y_label = "P(exceedance)";
    bool log_x = true;
    std::vector<SvgSeries> series;
};

namespace detail {

inline std::string escape_xml(const std::string& s) {
    std::string out;
    for (char ch : s) {
        switch (ch) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += ch;
        }
    }
    return out;
}

}  // namespace detail

/// Static line chart, y fixed to [0, 1]. Undefined points break the line.
inline std::string render_svg(const SvgChart& chart) {
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};
    constexpr double W = 640, H = 420, L = 70, R = 150, T = 40, B = 55;
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    for (const auto& s : chart.series)
        for (double x : s.x)
            if (!chart.log_x || x > 0.0) {
                xmin = std::min(xmin, x);
                xmax = std::max(xmax, x);
            }
    if (!std::isfinite(xmin)) throw DataError("svg: nothing to plot");
    if (xmax <= xmin) xmax = xmin * 1.1 + 1e-9;
    auto fx = [&](double x) {
        const double a = chart.log_x ? std::log(x) : x;
        const double lo = chart.log_x ? std::log(xmin) : xmin;
        const double hi = chart.log_x ? std::log(xmax) : xmax;
        return L + (a - lo) / (hi - lo) * (W - L - R);
    };
    auto fy = [&](double y) { return H - B - std::clamp(y, 0.0, 1.0) * (H - T - B); };

    std::ostringstream os;
    os.imbue(std::locale::classic());
    os << std::fixed << std::setprecision(2);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
       << ' ' << H << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
       << detail::escape_xml(chart.title) << "</text>\n";
    // axes and ticks
    os << "<g stroke=\"#444\" fill=\"none\"><rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R
       << "\" height=\"" << H - T - B << "\"/></g>\n";
    os << "<g font-family=\"sans-serif\" font-size=\"10\" fill=\"#222\">\n";
    for (int k = 0; k <= 5; ++k) {
        const double y = 0.2 * k;
        os << "<line x1=\"" << L - 4 << "\" y1=\"" << fy(y) << "\" x2=\"" << W - R << "\" y2=\"" << fy(y)
           << "\" stroke=\"#ddd\"/>";
        os << "<text x=\"" << L - 8 << "\" y=\"" << fy(y) + 3 << "\" text-anchor=\"end\">" << std::setprecision(1) << y
           << std::setprecision(2) << "</text>\n";
    }
    for (int k = 0; k <= 4; ++k) {
        const double x = chart.log_x ? std::exp(std::log(xmin) + (std::log(xmax) - std::log(xmin)) * k / 4.0)
                                     : xmin + (xmax - xmin) * k / 4.0;
        std::ostringstream lab;
        lab.imbue(std::locale::classic());
        lab << std::setprecision(3) << x;
        os << "<text x=\"" << fx(x) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">" << lab.str()
           << "</text>\n";
    }
    os << "<text x=\"" << L + (W - L - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">"
       << detail::escape_xml(chart.x_label) << "</text>\n";
    os << "<text x=\"16\" y=\"" << T + (H - T - B) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
       << T + (H - T - B) / 2 << ")\">" << detail::escape_xml(chart.y_label) << "</text>\n</g>\n";

    for (std::size_t si = 0; si < chart.series.size(); ++si) {
        const auto& s = chart.series[si];
        const char* colour = palette[si % std::size(palette)];
        if (!s.lower.empty() && s.lower.size() == s.x.size() && s.upper.size() == s.x.size()) {
            // band polygons over runs of defined points
            std::size_t i = 0;
            while (i < s.x.size()) {
                while (i < s.x.size() && !(s.lower[i] && s.upper[i])) ++i;
                std::size_t j = i;
                while (j < s.x.size() && s.lower[j] && s.upper[j]) ++j;
                if (j > i + 1) {
                    os << "<polygon fill=\"" << colour << "\" fill-opacity=\"0.18\" stroke=\"none\" points=\"";
                    for (std::size_t k = i; k < j; ++k) os << fx(s.x[k]) << ',' << fy(*s.upper[k]) << ' ';
                    for (std::size_t k = j; k-- > i;) os << fx(s.x[k]) << ',' << fy(*s.lower[k]) << ' ';
                    os << "\"/>\n";
                }
                i = j;
            }
        }
        std::string pts;
        auto flush = [&] {
            if (!pts.empty())
                os << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.6\" points=\"" << pts
                   << "\"/>\n";
            pts.clear();
        };
        for (std::size_t k = 0; k < s.x.size() && k < s.y.size(); ++k) {
            if (!s.y[k] || (chart.log_x && !(s.x[k] > 0.0))) {
                flush();
                continue;
            }
            std::ostringstream p;
            p.imbue(std::locale::classic());
            p << std::fixed << std::setprecision(2) << fx(s.x[k]) << ',' << fy(*s.y[k]) << ' ';
            pts += p.str();
        }
        flush();
        const double ly = T + 14 + 16.0 * static_cast<double>(si);
        os << "<line x1=\"" << W - R + 10 << "\" y1=\"" << ly << "\" x2=\"" << W - R + 30 << "\" y2=\"" << ly
           << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>";
        os << "<text x=\"" << W - R + 35 << "\" y=\"" << ly + 4
           << "\" font-family=\"sans-serif\" font-size=\"11\">" << detail::escape_xml(s.name) << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

inline void write_svg(const std::string& path, const SvgChart& chart) {
    const auto text = render_svg(chart);
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot open '" + path + "' for writing");
    os << text;
    if (!os) throw DataError("write failed for '" + path + "'");
}

}  // namespace fragility::app
