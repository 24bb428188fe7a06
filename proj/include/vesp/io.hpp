#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "vesp/field.hpp"

namespace vesp {

/// Shortest text that reads back to the same double (17 significant digits).
inline std::string fmt17(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace detail {

template <class T>
void put_le(std::ostream& os, T v) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big)
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    os.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <class T>
T get_le(std::istream& is) {
    unsigned char b[sizeof(T)];
    if (!is.read(reinterpret_cast<char*>(b), sizeof(T))) throw PreconditionError("truncated field file");
    if constexpr (std::endian::native == std::endian::big)
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    T v;
    std::memcpy(&v, b, sizeof(T));
    return v;
}

}  // namespace detail

/// Binary container: int32 dim, int32 n, float64 L, int32 component count,
/// then every component row-major as little-endian float64. A text sidecar
/// `<path>.meta` repeats the header and names the components.
inline void write_fields(const std::string& path, const std::vector<Field>& comps,
                         const std::vector<std::string>& names = {},
                         const std::vector<std::pair<std::string, std::string>>& extra = {}) {
    require(!comps.empty(), "nothing to write");
    const Grid& g = comps.front().grid();
    for (const auto& c : comps) require(c.grid() == g, "components must share one grid");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw PreconditionError("cannot open " + path + " for writing");
    detail::put_le<std::int32_t>(os, g.dim);
    detail::put_le<std::int32_t>(os, g.n);
    detail::put_le<double>(os, g.length);
    detail::put_le<std::int32_t>(os, static_cast<std::int32_t>(comps.size()));
    for (const auto& c : comps)
        for (double v : c.values()) detail::put_le<double>(os, v);
    if (!os) throw PreconditionError("write to " + path + " failed");

    std::ofstream meta(path + ".meta");
    meta << "format=vesp-fields-1\n"
         << "dim=" << g.dim << "\nn=" << g.n << "\nlength=" << fmt17(g.length)
         << "\ncomponents=" << comps.size() << "\nlayout=row-major, last axis fastest\n"
         << "encoding=float64 little-endian\n";
    if (!names.empty()) {
        meta << "names=";
        for (std::size_t i = 0; i < names.size(); ++i) meta << (i ? "," : "") << names[i];
        meta << "\n";
    }
    for (const auto& [k, v] : extra) meta << k << "=" << v << "\n";
}

inline std::vector<Field> read_fields(const std::string& path, double dealias_fraction = 2.0 / 3.0) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw PreconditionError("cannot open " + path);
    Grid g;
    g.dim = detail::get_le<std::int32_t>(is);
    g.n = detail::get_le<std::int32_t>(is);
    g.length = detail::get_le<double>(is);
    g.dealias_fraction = dealias_fraction;
    g.validate();
    const auto count = detail::get_le<std::int32_t>(is);
    require(count >= 1, "field file holds no components");
    std::vector<Field> out;
    for (std::int32_t c = 0; c < count; ++c) {
        std::vector<double> v(g.points());
        for (double& x : v) x = detail::get_le<double>(is);
        out.emplace_back(g, std::move(v));
    }
    if (is.peek() != std::char_traits<char>::eof()) throw PreconditionError("trailing bytes in " + path);
    return out;
}

/// CSV with a fixed header; reals are written with 17 significant digits.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header) : cols_(header.size()) { line(header); }

    CsvWriter& row(const std::vector<std::string>& cells) {
        require(cells.size() == cols_, "CSV row width does not match the header");
        line(cells);
        return *this;
    }
    CsvWriter& row(const std::vector<double>& cells) {
        std::vector<std::string> s;
        for (double x : cells) s.push_back(fmt17(x));
        return row(s);
    }
    std::string str() const { return out_.str(); }
    void save(const std::string& path) const {
        std::ofstream os(path);
        if (!os) throw PreconditionError("cannot open " + path + " for writing");
        os << out_.str();
    }

private:
    void line(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
        out_ << "\n";
    }
    std::size_t cols_;
    std::ostringstream out_;
};

}  // namespace vesp
