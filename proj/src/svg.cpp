#include "causalfs/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace causalfs {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#e377c2"};
constexpr int kPaletteSize = 8;

constexpr double kWidth = 640.0, kHeight = 420.0;
constexpr double kLeft = 64.0, kRight = 616.0, kTop = 48.0, kBottom = 370.0;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string escape(const std::string& text) {
    std::string out;
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string render_line_chart(const std::string& title, const std::string& x_label,
                              const std::string& y_label,
                              const std::vector<ChartSeries>& series, double reference) {
    if (series.empty()) throw std::invalid_argument("render_line_chart: no series");
    double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
    double y_min = x_min, y_max = -x_min;
    for (const ChartSeries& s : series) {
        if (s.points.empty()) throw std::invalid_argument("render_line_chart: empty series");
        for (auto [x, y] : s.points) {
            if (!std::isfinite(x) || !std::isfinite(y)) {
                throw std::invalid_argument("render_line_chart: non-finite point");
            }
            x_min = std::min(x_min, x);
            x_max = std::max(x_max, x);
            y_min = std::min(y_min, y);
            y_max = std::max(y_max, y);
        }
    }
    if (std::isfinite(reference)) {
        y_min = std::min(y_min, reference);
        y_max = std::max(y_max, reference);
    }
    if (x_max == x_min) {
        x_min -= 1.0;
        x_max += 1.0;
    }
    double pad = 0.05 * (y_max - y_min);
    if (pad == 0.0) pad = std::abs(y_max) > 0.0 ? 0.05 * std::abs(y_max) : 1.0;
    y_min -= pad;
    y_max += pad;

    auto px = [&](double x) { return kLeft + (x - x_min) / (x_max - x_min) * (kRight - kLeft); };
    auto py = [&](double y) { return kBottom - (y - y_min) / (y_max - y_min) * (kBottom - kTop); };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
    svg << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
    svg << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"15\">" << escape(title) << "</text>\n";

    // Axes with five ticks per side.
    svg << "<line x1=\"" << kLeft << "\" y1=\"" << kBottom << "\" x2=\"" << kRight
        << "\" y2=\"" << kBottom << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
        << kBottom << "\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 5; ++t) {
        double fx = x_min + (x_max - x_min) * t / 5.0;
        double fy = y_min + (y_max - y_min) * t / 5.0;
        svg << "<line x1=\"" << num(px(fx)) << "\" y1=\"" << kBottom << "\" x2=\"" << num(px(fx))
            << "\" y2=\"" << kBottom + 5 << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << num(px(fx)) << "\" y=\"" << kBottom + 20
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
            << num(fx) << "</text>\n";
        svg << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << num(py(fy)) << "\" x2=\"" << kLeft
            << "\" y2=\"" << num(py(fy)) << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << kLeft - 8 << "\" y=\"" << num(py(fy) + 4)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << num(fy)
            << "</text>\n";
    }
    svg << "<text x=\"" << (kLeft + kRight) / 2 << "\" y=\"" << kHeight - 12
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
        << escape(x_label) << "</text>\n";
    svg << "<text x=\"18\" y=\"" << (kTop + kBottom) / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
        << "transform=\"rotate(-90 18 " << (kTop + kBottom) / 2 << ")\">" << escape(y_label)
        << "</text>\n";

    if (std::isfinite(reference)) {
        svg << "<line x1=\"" << kLeft << "\" y1=\"" << num(py(reference)) << "\" x2=\"" << kRight
            << "\" y2=\"" << num(py(reference))
            << "\" stroke=\"#999999\" stroke-dasharray=\"2,3\"/>\n";
    }

    for (std::size_t i = 0; i < series.size(); ++i) {
        const ChartSeries& s = series[i];
        std::string color = s.color.empty() ? kPalette[i % kPaletteSize] : s.color;
        std::vector<std::pair<double, double>> pts = s.points;
        std::sort(pts.begin(), pts.end());
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.8\"";
        if (s.dashed) svg << " stroke-dasharray=\"6,4\"";
        svg << " points=\"";
        for (std::size_t p = 0; p < pts.size(); ++p) {
            if (p) svg << ' ';
            svg << num(px(pts[p].first)) << ',' << num(py(pts[p].second));
        }
        svg << "\"/>\n";
        for (const auto& [x, y] : pts) {
            svg << "<circle cx=\"" << num(px(x)) << "\" cy=\"" << num(py(y))
                << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
        }

        double ly = kTop + 8.0 + 16.0 * static_cast<double>(i);
        svg << "<line x1=\"" << kRight - 150 << "\" y1=\"" << num(ly) << "\" x2=\""
            << kRight - 120 << "\" y2=\"" << num(ly) << "\" stroke=\"" << color
            << "\" stroke-width=\"1.8\"" << (s.dashed ? " stroke-dasharray=\"6,4\"" : "")
            << "/>\n";
        svg << "<text x=\"" << kRight - 114 << "\" y=\"" << num(ly + 4)
            << "\" font-family=\"sans-serif\" font-size=\"11\">" << escape(s.label)
            << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace causalfs
