#include "nldep/io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "nldep/error.hpp"
#include "util.hpp"

namespace nldep {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    std::string t = s.substr(b, e - b + 1);
    if (t.size() >= 2 && t.front() == '"' && t.back() == '"') t = t.substr(1, t.size() - 2);
    return t;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

std::vector<std::vector<double>> read_csv_columns(const std::string& path, const std::vector<std::string>& columns) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ": empty file, header row required");
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    const auto header = split(line);
    std::vector<std::size_t> pos;
    for (const auto& c : columns) {
        std::size_t k = 0;
        while (k < header.size() && header[k] != c) ++k;
        if (k == header.size()) {
            std::string avail;
            for (const auto& h : header) avail += (avail.empty() ? "" : ", ") + h;
            throw MissingColumnError("column '" + c + "' not found; available: " + avail);
        }
        pos.push_back(k);
    }
    std::vector<std::vector<double>> out(columns.size());
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        const auto cells = split(line);
        for (std::size_t c = 0; c < pos.size(); ++c) {
            const std::string where = "row " + std::to_string(row) + ", column '" + columns[c] + "'";
            if (pos[c] >= cells.size() || cells[pos[c]].empty()) throw ParseError(where + ": missing value");
            const std::string& cell = cells[pos[c]];
            char* end = nullptr;
            errno = 0;
            const double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str() || *end != '\0' || !std::isfinite(v) || errno == ERANGE)
                throw ParseError(where + ": non-numeric cell '" + cell + "'");
            out[c].push_back(v);
        }
    }
    return out;
}

PairedSample ingest_paired(const std::string& path, const std::string& x_column, const std::string& y_column) {
    auto cols = read_csv_columns(path, {x_column, y_column});
    if (cols[0].size() < 2) throw SampleTooSmallError(path + ": need at least 2 data rows");
    return PairedSample(std::move(cols[0]), std::move(cols[1]));
}

SeriesSample ingest_series(const std::string& path, const std::string& column) {
    auto cols = read_csv_columns(path, {column});
    if (cols[0].size() < 2) throw SampleTooSmallError(path + ": need at least 2 data rows");
    return SeriesSample(std::move(cols[0]));
}

std::vector<double> log_returns(const SeriesSample& prices) {
    const auto p = prices.values();
    for (std::size_t t = 0; t < p.size(); ++t)
        if (!(p[t] > 0.0)) throw DomainError("log_returns: price " + detail::num(p[t]) + " at index " + std::to_string(t) + " is not positive");
    std::vector<double> r(p.size() - 1);
    for (std::size_t t = 1; t < p.size(); ++t) r[t - 1] = 100.0 * (std::log(p[t]) - std::log(p[t - 1]));
    return r;
}

std::string to_csv(const std::vector<std::string>& names, const std::vector<std::vector<double>>& columns) {
    if (names.size() != columns.size()) throw ShapeError("to_csv: names and columns differ in count");
    const std::size_t n = columns.empty() ? 0 : columns[0].size();
    for (const auto& c : columns)
        if (c.size() != n) throw ShapeError("to_csv: columns differ in length");
    std::string out;
    for (std::size_t c = 0; c < names.size(); ++c) out += (c ? "," : "") + names[c];
    out += '\n';
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < columns.size(); ++c) out += (c ? "," : "") + detail::num(columns[c][i]);
        out += '\n';
    }
    return out;
}

}  // namespace nldep
