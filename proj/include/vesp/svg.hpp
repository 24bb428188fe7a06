#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "vesp/error.hpp"

namespace vesp {

struct PlotSeries {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

/// Static line chart. Output depends only on the data, so repeated runs
/// produce identical files.
struct LinePlot {
    std::string title;
    std::string xlabel;
    std::string ylabel;
    bool log_x = false;
    bool log_y = false;
    std::vector<PlotSeries> series;

    std::string render(int width = 640, int height = 420) const {
        const double left = 70, right = 150, top = 40, bottom = 50;
        const double pw = width - left - right, ph = height - top - bottom;
        auto tx = [&](double v) { return log_x ? std::log10(v) : v; };
        auto ty = [&](double v) { return log_y ? std::log10(v) : v; };
        auto usable = [&](double x, double y) {
            return std::isfinite(tx(x)) && std::isfinite(ty(y)) && (!log_x || x > 0) && (!log_y || y > 0);
        };
        double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
        for (const auto& s : series) {
            require(s.x.size() == s.y.size(), "plot series '" + s.name + "' has mismatched lengths");
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (!usable(s.x[i], s.y[i])) continue;
                x0 = std::min(x0, tx(s.x[i]));
                x1 = std::max(x1, tx(s.x[i]));
                y0 = std::min(y0, ty(s.y[i]));
                y1 = std::max(y1, ty(s.y[i]));
            }
        }
        if (!(x0 <= x1)) x0 = 0, x1 = 1;
        if (!(y0 <= y1)) y0 = 0, y1 = 1;
        if (x1 == x0) x0 -= 0.5, x1 += 0.5;
        if (y1 == y0) y0 -= 0.5, y1 += 0.5;
        auto px = [&](double v) { return left + (tx(v) - x0) / (x1 - x0) * pw; };
        auto py = [&](double v) { return top + (1.0 - (ty(v) - y0) / (y1 - y0)) * ph; };

        std::ostringstream os;
        os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
           << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
        os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        os << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
           << "</text>\n";
        os << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(pw) << "\" height=\""
           << num(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
        for (int k = 0; k <= 4; ++k) {
            const double fx = x0 + (x1 - x0) * k / 4.0, fy = y0 + (y1 - y0) * k / 4.0;
            const double gx = left + pw * k / 4.0, gy = top + ph * (1.0 - k / 4.0);
            os << "<text x=\"" << num(gx) << "\" y=\"" << num(top + ph + 16) << "\" text-anchor=\"middle\">"
               << tick(fx, log_x) << "</text>\n";
            os << "<text x=\"" << num(left - 6) << "\" y=\"" << num(gy + 4) << "\" text-anchor=\"end\">"
               << tick(fy, log_y) << "</text>\n";
        }
        os << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << height - 10 << "\" text-anchor=\"middle\">"
           << escape(xlabel) << "</text>\n";
        os << "<text x=\"16\" y=\"" << num(top + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
           << num(top + ph / 2) << ")\">" << escape(ylabel) << "</text>\n";

        static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
        for (std::size_t k = 0; k < series.size(); ++k) {
            const auto& s = series[k];
            const char* c = colors[k % 6];
            os << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.5\" points=\"";
            bool first = true;
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (!usable(s.x[i], s.y[i])) continue;
                os << (first ? "" : " ") << num(px(s.x[i])) << "," << num(py(s.y[i]));
                first = false;
            }
            os << "\"/>\n";
            const double ly = top + 14 + 18.0 * static_cast<double>(k);
            os << "<line x1=\"" << num(left + pw + 10) << "\" y1=\"" << num(ly - 4) << "\" x2=\""
               << num(left + pw + 30) << "\" y2=\"" << num(ly - 4) << "\" stroke=\"" << c << "\"/>\n";
            os << "<text x=\"" << num(left + pw + 34) << "\" y=\"" << num(ly) << "\">" << escape(s.name)
               << "</text>\n";
        }
        os << "</svg>\n";
        return os.str();
    }

    void save(const std::string& path) const {
        std::ofstream os(path);
        if (!os) throw PreconditionError("cannot open " + path + " for writing");
        os << render();
    }

private:
    static std::string num(double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", v);
        return buf;
    }
    static std::string tick(double v, bool log) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3g", log ? std::pow(10.0, v) : v);
        return buf;
    }
    static std::string escape(const std::string& s) {
        std::string out;
        for (char ch : s) {
            if (ch == '<') out += "&lt;";
            else if (ch == '>') out += "&gt;";
            else if (ch == '&') out += "&amp;";
            else out += ch;
        }
        return out;
    }
};

}  // namespace vesp
