#include "foldsense/svg.hpp"

#include "foldsense/errors.hpp"
#include "foldsense/text.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace foldsense {

namespace {

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                          "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    void add(double v) {
        if (!std::isfinite(v)) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void pad() {
        if (lo > hi) {
            lo = 0.0;
            hi = 1.0;
        }
        if (hi - lo < 1e-12) {
            lo -= 0.5;
            hi += 0.5;
        } else {
            const double m = 0.05 * (hi - lo);
            lo -= m;
            hi += m;
        }
    }
};

}  // namespace

std::string render_line_chart(const ChartSpec& spec) {
    const int W = spec.width, H = spec.height;
    const int ml = 64, mr = 16, mt = 36, mb = 48;

    Range rx, ry;
    for (const auto& s : spec.series) {
        for (double v : s.x) rx.add(v);
        for (double v : s.y) ry.add(v);
    }
    rx.pad();
    ry.pad();

    auto px = [&](double x) { return ml + (x - rx.lo) / (rx.hi - rx.lo) * (W - ml - mr); };
    auto py = [&](double y) { return H - mb - (y - ry.lo) / (ry.hi - ry.lo) * (H - mt - mb); };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n";
    out << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    out << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"15\" "
           "font-family=\"sans-serif\">"
        << spec.title << "</text>\n";

    // Axes box and ticks.
    out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr
        << "\" height=\"" << H - mt - mb << "\" fill=\"none\" stroke=\"#444\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double fx = rx.lo + (rx.hi - rx.lo) * i / 4.0;
        const double fy = ry.lo + (ry.hi - ry.lo) * i / 4.0;
        out << "<text x=\"" << g6(px(fx)) << "\" y=\"" << H - mb + 16
            << "\" text-anchor=\"middle\" font-size=\"11\" font-family=\"sans-serif\">" << g6(fx)
            << "</text>\n";
        out << "<text x=\"" << ml - 6 << "\" y=\"" << g6(py(fy) + 4)
            << "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">" << g6(fy)
            << "</text>\n";
        out << "<line x1=\"" << ml << "\" y1=\"" << g6(py(fy)) << "\" x2=\"" << W - mr
            << "\" y2=\"" << g6(py(fy)) << "\" stroke=\"#ddd\"/>\n";
    }
    out << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 10
        << "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\">"
        << spec.x_label << "</text>\n";
    out << "<text x=\"14\" y=\"" << (mt + H - mb) / 2
        << "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\" "
           "transform=\"rotate(-90 14 "
        << (mt + H - mb) / 2 << ")\">" << spec.y_label << "</text>\n";

    for (std::size_t s = 0; s < spec.series.size(); ++s) {
        const auto& ser = spec.series[s];
        const char* color = kPalette[s % 8];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < ser.x.size() && i < ser.y.size(); ++i)
            out << g6(px(ser.x[i])) << ',' << g6(py(ser.y[i])) << ' ';
        out << "\"/>\n";
        out << "<text x=\"" << W - mr - 8 << "\" y=\"" << mt + 16 + 14 * (int)s
            << "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\" fill=\""
            << color << "\">" << ser.label << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

void write_line_chart(const std::string& path, const ChartSpec& spec) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write chart: " + path);
    out << render_line_chart(spec);
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace foldsense
