#pragma once

// Table output (CSV, 17 significant digits) and a minimal SVG line plot.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "phaselab/errors.hpp"

namespace phaselab {

inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    void add(std::vector<double> row) {
        if (row.size() != columns.size()) throw DomainError("row width does not match the header");
        rows.push_back(std::move(row));
    }
    std::vector<double> column(const std::string& name) const {
        auto it = std::find(columns.begin(), columns.end(), name);
        if (it == columns.end()) throw DomainError("no column " + name);
        std::size_t k = static_cast<std::size_t>(it - columns.begin());
        std::vector<double> out;
        for (const auto& r : rows) out.push_back(r[k]);
        return out;
    }
};

inline void write_csv(std::ostream& os, const Table& t) {
    for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
    os << '\n';
    for (const auto& r : t.rows) {
        for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << format_number(r[i]);
        os << '\n';
    }
}

inline void write_csv(const std::string& path, const Table& t) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    write_csv(f, t);
}

// ---------------------------------------------------------------------------

struct Series {
    std::string name;
    std::vector<double> x, y;
    bool dashed = false;
    std::string color = "#1f4e9c";
    bool markers = false;  // draw points instead of a line
};

struct Plot {
    std::string title, xlabel, ylabel;
    std::vector<Series> series;
    int width = 720, height = 480;
};

inline std::string svg_escape(const std::string& s) {
    std::string o;
    for (char c : s) {
        switch (c) {
            case '<': o += "&lt;"; break;
            case '>': o += "&gt;"; break;
            case '&': o += "&amp;"; break;
            case '"': o += "&quot;"; break;
            default: o += c;
        }
    }
    return o;
}

inline std::string render_svg(const Plot& p) {
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : p.series)
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, s.y[i]);
            y1 = std::max(y1, s.y[i]);
        }
    if (!std::isfinite(x0)) { x0 = 0; x1 = 1; y0 = 0; y1 = 1; }
    if (x1 == x0) x1 = x0 + 1;
    if (y1 == y0) y1 = y0 + 1;
    const double ml = 70, mr = 150, mt = 40, mb = 50;
    const double W = p.width, H = p.height, pw = W - ml - mr, ph = H - mt - mb;
    auto X = [&](double v) { return ml + (v - x0) / (x1 - x0) * pw; };
    auto Y = [&](double v) { return mt + (1.0 - (v - y0) / (y1 - y0)) * ph; };
    char buf[128];
    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << p.width << "\" height=\"" << p.height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    std::snprintf(buf, sizeof buf, "<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" fill=\"none\" stroke=\"black\"/>\n",
                  ml, mt, pw, ph);
    o << buf;
    for (int k = 0; k <= 5; ++k) {
        double xv = x0 + (x1 - x0) * k / 5, yv = y0 + (y1 - y0) * k / 5;
        std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\">%.3g</text>\n", X(xv),
                      mt + ph + 16, xv);
        o << buf;
        std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"end\">%.3g</text>\n", ml - 6,
                      Y(yv) + 4, yv);
        o << buf;
    }
    o << "<text x=\"" << ml + pw / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">" << svg_escape(p.xlabel)
      << "</text>\n";
    o << "<text x=\"16\" y=\"" << mt + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << mt + ph / 2 << ")\">" << svg_escape(p.ylabel) << "</text>\n";
    o << "<text x=\"" << ml + pw / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" << svg_escape(p.title)
      << "</text>\n";
    int legend = 0;
    for (const auto& s : p.series) {
        if (s.markers) {
            for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
                if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
                std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"3\" fill=\"%s\"/>\n", X(s.x[i]),
                              Y(s.y[i]), s.color.c_str());
                o << buf;
            }
        } else {
            // NaN breaks the polyline into pieces
            std::string pts;
            auto flush = [&] {
                if (!pts.empty())
                    o << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\""
                      << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << " points=\"" << pts << "\"/>\n";
                pts.clear();
            };
            for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
                if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) { flush(); continue; }
                std::snprintf(buf, sizeof buf, "%.2f,%.2f ", X(s.x[i]), Y(s.y[i]));
                pts += buf;
            }
            flush();
        }
        if (!s.name.empty()) {
            double ly = mt + 14 + 16 * legend++;
            std::snprintf(buf, sizeof buf, "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"%s\"%s/>\n",
                          ml + pw + 10, ly - 4, ml + pw + 30, ly - 4, s.color.c_str(),
                          s.dashed ? " stroke-dasharray=\"6,4\"" : "");
            o << buf;
            o << "<text x=\"" << ml + pw + 34 << "\" y=\"" << ly << "\">" << svg_escape(s.name) << "</text>\n";
        }
    }
    o << "</svg>\n";
    return o.str();
}

inline void write_svg(const std::string& path, const Plot& p) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    f << render_svg(p);
}

}  // namespace phaselab
