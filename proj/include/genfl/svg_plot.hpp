#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "genfl/costmodel.hpp"

namespace genfl {

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

namespace detail {

inline std::string svg_num(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 2);
    return std::string(buf, res.ptr);
}

inline std::string svg_tick_label(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline constexpr std::array<std::string_view, 6> kPalette = {
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
};

}  // namespace detail

// Fixed-size line chart; y is pinned to [0,1] (accuracy), x spans the data.
// Output depends only on the input series, so golden-file comparison works.
inline std::string render_line_plot(const std::vector<PlotSeries>& series,
                                    const std::string& x_label = "round",
                                    const std::string& y_label = "test accuracy") {
    if (series.empty()) throw std::invalid_argument("plot: no input series");
    double x_max = 0.0;
    for (const auto& s : series) {
        if (s.x.empty()) throw std::invalid_argument("plot: empty series '" + s.label + "'");
        if (s.x.size() != s.y.size())
            throw std::invalid_argument("plot: x/y length mismatch in series '" + s.label + "'");
        x_max = std::max(x_max, *std::max_element(s.x.begin(), s.x.end()));
    }
    if (x_max <= 0.0) x_max = 1.0;

    constexpr double width = 800.0, height = 500.0;
    constexpr double left = 70.0, right = 640.0, top = 20.0, bottom = 450.0;
    const auto sx = [&](double x) { return left + (right - left) * (x / x_max); };
    const auto sy = [&](double y) { return bottom - (bottom - top) * y; };

    using detail::svg_num;
    using detail::svg_tick_label;
    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"500\" "
           "viewBox=\"0 0 800 500\">\n";
    out += "<rect x=\"0\" y=\"0\" width=\"800\" height=\"500\" fill=\"white\"/>\n";

    out += "<line x1=\"" + svg_num(left) + "\" y1=\"" + svg_num(bottom) + "\" x2=\"" +
           svg_num(right) + "\" y2=\"" + svg_num(bottom) +
           "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    out += "<line x1=\"" + svg_num(left) + "\" y1=\"" + svg_num(top) + "\" x2=\"" +
           svg_num(left) + "\" y2=\"" + svg_num(bottom) +
           "\" stroke=\"black\" stroke-width=\"1\"/>\n";

    for (int i = 0; i <= 4; ++i) {
        const double frac = i / 4.0;
        const double xv = x_max * frac;
        const double px = sx(xv);
        out += "<line x1=\"" + svg_num(px) + "\" y1=\"" + svg_num(bottom) + "\" x2=\"" +
               svg_num(px) + "\" y2=\"" + svg_num(bottom + 5) + "\" stroke=\"black\"/>\n";
        out += "<text x=\"" + svg_num(px) + "\" y=\"" + svg_num(bottom + 20) +
               "\" font-size=\"12\" text-anchor=\"middle\">" + svg_tick_label(xv) + "</text>\n";
        const double yv = frac;
        const double py = sy(yv);
        out += "<line x1=\"" + svg_num(left - 5) + "\" y1=\"" + svg_num(py) + "\" x2=\"" +
               svg_num(left) + "\" y2=\"" + svg_num(py) + "\" stroke=\"black\"/>\n";
        out += "<text x=\"" + svg_num(left - 10) + "\" y=\"" + svg_num(py + 4) +
               "\" font-size=\"12\" text-anchor=\"end\">" + svg_tick_label(yv) + "</text>\n";
    }
    out += "<text x=\"" + svg_num((left + right) / 2) + "\" y=\"" + svg_num(height - 10) +
           "\" font-size=\"14\" text-anchor=\"middle\">" + x_label + "</text>\n";
    out += "<text x=\"18\" y=\"" + svg_num((top + bottom) / 2) +
           "\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
           svg_num((top + bottom) / 2) + ")\">" + y_label + "</text>\n";

    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& s = series[i];
        const std::string_view color = detail::kPalette[i % detail::kPalette.size()];
        out += "<polyline fill=\"none\" stroke=\"";
        out += color;
        out += "\" stroke-width=\"2\" points=\"";
        for (std::size_t j = 0; j < s.x.size(); ++j) {
            if (j) out += ' ';
            out += svg_num(sx(s.x[j]));
            out += ',';
            out += svg_num(sy(std::clamp(s.y[j], 0.0, 1.0)));
        }
        out += "\"/>\n";
    }

    for (std::size_t i = 0; i < series.size(); ++i) {
        const std::string_view color = detail::kPalette[i % detail::kPalette.size()];
        const double ly = top + 16.0 + 18.0 * static_cast<double>(i);
        out += "<line x1=\"" + svg_num(right + 15) + "\" y1=\"" + svg_num(ly) + "\" x2=\"" +
               svg_num(right + 40) + "\" y2=\"" + svg_num(ly) + "\" stroke=\"";
        out += color;
        out += "\" stroke-width=\"2\"/>\n";
        out += "<text x=\"" + svg_num(right + 46) + "\" y=\"" + svg_num(ly + 4) +
               "\" font-size=\"12\">" + series[i].label + "</text>\n";
    }

    out += "</svg>\n";
    return out;
}

// Accuracy-vs-round series from metric rows; legend label defaults to the mode.
inline PlotSeries accuracy_series(const std::vector<RoundMetrics>& rows, std::string label = "") {
    if (rows.empty()) throw std::invalid_argument("plot: metrics table has no rows");
    PlotSeries s;
    s.label = label.empty() ? rows.front().mode : std::move(label);
    s.x.reserve(rows.size());
    s.y.reserve(rows.size());
    for (const auto& m : rows) {
        s.x.push_back(static_cast<double>(m.round));
        s.y.push_back(m.test_accuracy);
    }
    return s;
}

}  // namespace genfl
