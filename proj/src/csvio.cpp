#include "parex/csvio.hpp"

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace parex {

const char* const kVersion = "0.1.0";

std::string format_real(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

double parse_real(const std::string& s) {
    const char* p = s.c_str();
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(p, &end);
    if (end == p || *end != '\0') throw DomainError("not a number: '" + s + "'");
    return v;
}

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, sep)) out.push_back(trim(cell));
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

// Reads the header and returns the data rows split into cells.
std::vector<std::vector<std::string>> read_table(std::istream& is, const std::string& header) {
    std::string line;
    if (!std::getline(is, line) || trim(line) != header)
        throw DomainError("CSV header mismatch: expected '" + header + "'");
    const std::size_t ncol = split(header, ',').size();
    std::vector<std::vector<std::string>> rows;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto cells = split(line, ',');
        if (cells.size() != ncol) throw DomainError("CSV line " + std::to_string(lineno) + ": wrong column count");
        rows.push_back(std::move(cells));
    }
    return rows;
}

}  // namespace

void write_density_csv(std::ostream& os, const DensityGrid& g) {
    os << "u,y,density\n";
    for (std::size_t i = 0; i < g.us.size(); ++i)
        for (std::size_t j = 0; j < g.ys.size(); ++j)
            os << format_real(g.us[i]) << ',' << format_real(g.ys[j]) << ',' << format_real(g.at(i, j)) << '\n';
}

DensityGrid read_density_csv(std::istream& is) {
    DensityGrid g;
    std::vector<double> ycol;
    for (const auto& r : read_table(is, "u,y,density")) {
        const double u = parse_real(r[0]), y = parse_real(r[1]);
        if (g.us.empty() || g.us.back() != u) g.us.push_back(u);
        if (g.us.size() == 1) g.ys.push_back(y);
        ycol.push_back(y);
        g.values.push_back(parse_real(r[2]));
    }
    bool rect = g.values.size() == g.us.size() * g.ys.size();
    for (std::size_t k = 0; rect && k < ycol.size(); ++k) rect = ycol[k] == g.ys[k % g.ys.size()];
    if (!rect) throw DomainError("density CSV is not a rectangular grid");
    return g;
}

void write_cdf_csv(std::ostream& os, const std::vector<double>& us, const std::vector<double>& cdf) {
    if (us.size() != cdf.size()) throw DomainError("write_cdf_csv: size mismatch");
    os << "u,cdf\n";
    for (std::size_t i = 0; i < us.size(); ++i) os << format_real(us[i]) << ',' << format_real(cdf[i]) << '\n';
}

std::pair<std::vector<double>, std::vector<double>> read_cdf_csv(std::istream& is) {
    std::pair<std::vector<double>, std::vector<double>> out;
    for (const auto& r : read_table(is, "u,cdf")) {
        out.first.push_back(parse_real(r[0]));
        out.second.push_back(parse_real(r[1]));
    }
    return out;
}

void write_mc_csv(std::ostream& os, const std::vector<Histogram>& hist) {
    os << "kind,bin_lo,bin_hi,estimate,stderr\n";
    for (const auto& h : hist) {
        const std::string kind = h.kind == "density" ? "density:" + format_real(h.u) : h.kind;
        for (std::size_t k = 0; k < h.lo.size(); ++k)
            os << kind << ',' << format_real(h.lo[k]) << ',' << format_real(h.hi[k]) << ','
               << format_real(h.estimate[k]) << ',' << format_real(h.stderr_[k]) << '\n';
    }
}

std::vector<Histogram> read_mc_csv(std::istream& is) {
    std::vector<Histogram> out;
    std::string current;
    for (const auto& r : read_table(is, "kind,bin_lo,bin_hi,estimate,stderr")) {
        if (out.empty() || r[0] != current) {
            current = r[0];
            Histogram h;
            if (current.rfind("density:", 0) == 0) {
                h.kind = "density";
                h.u = parse_real(current.substr(8));
            } else {
                h.kind = current;
            }
            out.push_back(std::move(h));
        }
        auto& h = out.back();
        h.lo.push_back(parse_real(r[1]));
        h.hi.push_back(parse_real(r[2]));
        h.estimate.push_back(parse_real(r[3]));
        h.stderr_.push_back(parse_real(r[4]));
    }
    return out;
}

void KeyValues::set(const std::string& key, const std::string& value) {
    for (auto& kv : items_)
        if (kv.first == key) {
            kv.second = value;
            return;
        }
    items_.emplace_back(key, value);
}

bool KeyValues::has(const std::string& key) const {
    return std::any_of(items_.begin(), items_.end(), [&](const auto& kv) { return kv.first == key; });
}

const std::string& KeyValues::get(const std::string& key) const {
    for (const auto& kv : items_)
        if (kv.first == key) return kv.second;
    throw DomainError("missing key: " + key);
}

std::string KeyValues::get_or(const std::string& key, const std::string& fallback) const {
    return has(key) ? get(key) : fallback;
}

KeyValues KeyValues::parse(std::istream& is) {
    KeyValues kv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos || eq == 0)
            throw DomainError("line " + std::to_string(lineno) + ": expected key=value");
        kv.set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    }
    return kv;
}

KeyValues KeyValues::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open " + path);
    try {
        return parse(in);
    } catch (const DomainError& e) {
        throw DomainError(path + ": " + e.what());
    }
}

void KeyValues::write(std::ostream& os) const {
    for (const auto& [k, v] : items_) os << k << '=' << v << '\n';
}

std::string manifest_path(const std::string& output) { return output + ".manifest"; }

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace parex
