#pragma once

#include <cstddef>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fragility/core/error.hpp"
#include "fragility/im/intensity.hpp"

namespace fragility::app {

/// Comma-separated writer; numbers at 9 significant digits, '.' decimal.
/// The whole file is buffered and written at close, so a failed run never
/// leaves a half-written table behind.
class CsvWriter {
public:
    CsvWriter(std::string path, const std::vector<std::string>& header) : path_(std::move(path)) {
        buf_.imbue(std::locale::classic());
        buf_ << std::setprecision(9);
        row(header);
    }

    template <class... Ts>
    void write(const Ts&... values) {
        bool first = true;
        ((cell(values, first)), ...);
        buf_ << '\n';
    }

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) buf_ << (i ? "," : "") << cells[i];
        buf_ << '\n';
    }

    void close() {
        std::ofstream os(path_, std::ios::binary);
        if (!os) throw DataError("cannot open '" + path_ + "' for writing");
        os << buf_.str();
        if (!os) throw DataError("write failed for '" + path_ + "'");
    }

private:
    template <class T>
    void cell(const T& v, bool& first) {
        if (!first) buf_ << ',';
        first = false;
        if constexpr (std::is_same_v<T, std::optional<double>>) {
            if (v) buf_ << *v;
        } else {
            buf_ << v;
        }
    }

    std::string path_;
    std::ostringstream buf_;
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

/// Header plus rows of a comma-separated file (no quoting).
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw DataError("CSV is missing column '" + name + "'");
    }
};

inline CsvTable read_csv(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open '" + path + "'");
    CsvTable t;
    std::string line;
    if (!std::getline(is, line)) throw DataError("'" + path + "' is empty");
    t.header = split_csv_line(line);
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto r = split_csv_line(line);
        if (r.size() != t.header.size())
            throw DataError("'" + path + "' line " + std::to_string(lineno) + ": expected " +
                            std::to_string(t.header.size()) + " fields");
        t.rows.push_back(std::move(r));
    }
    return t;
}

inline double parse_cell(const std::string& s, const std::string& where) {
    std::istringstream is(s);
    is.imbue(std::locale::classic());
    double v = 0.0;
    if (!(is >> v) || !(is >> std::ws).eof()) throw DataError(where + ": '" + s + "' is not a number");
    return v;
}

inline const std::vector<std::string>& records_header() {
    static const std::vector<std::string> h{"motion_id", "pga_g", "sa_g", "psa_g", "arias_sg", "d595_s", "delta_max"};
    return h;
}

inline void write_records(const std::string& path, const std::vector<im::DemandRecord>& records) {
    CsvWriter w(path, records_header());
    for (const auto& r : records) w.write(r.motion_id, r.im.pga, r.im.sa, r.im.psa, r.im.arias, r.im.d595, r.delta);
    w.close();
}

inline std::vector<im::DemandRecord> read_records(const std::string& path) {
    const auto t = read_csv(path);
    const auto& h = records_header();
    std::vector<std::size_t> col;
    for (const auto& name : h) col.push_back(t.column(name));
    std::vector<im::DemandRecord> out;
    out.reserve(t.rows.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& r = t.rows[i];
        const std::string where = path + " row " + std::to_string(i + 2);
        im::DemandRecord d;
        d.motion_id = r[col[0]];
        d.im.pga = parse_cell(r[col[1]], where);
        d.im.sa = parse_cell(r[col[2]], where);
        d.im.psa = parse_cell(r[col[3]], where);
        d.im.arias = parse_cell(r[col[4]], where);
        d.im.d595 = parse_cell(r[col[5]], where);
        d.delta = parse_cell(r[col[6]], where);
        if (!(d.delta >= 0.0)) throw DataError(where + ": delta_max must be >= 0");
        out.push_back(std::move(d));
    }
    if (out.empty()) throw DataError("'" + path + "' has no records");
    return out;
}

}  // namespace fragility::app
