#pragma once

#include <algorithm>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "splitgates/sim.hpp"

namespace splitgates::svg {

// One plotted series: per-group coverage and average CI length for a method
// at a fixed sample size.
struct MethodSeries {
    std::string method_id;
    std::vector<double> coverage;
    std::vector<double> length;
};

inline std::vector<MethodSeries> series_for_sample_size(const std::vector<CellStats>& cells,
                                                        int n) {
    std::vector<MethodSeries> out;
    for (const auto& cell : cells) {
        if (cell.n != n) continue;
        MethodSeries* series = nullptr;
        for (auto& s : out)
            if (s.method_id == cell.method_id) series = &s;
        if (!series) {
            out.push_back({cell.method_id, {}, {}});
            series = &out.back();
        }
        const auto idx = static_cast<std::size_t>(cell.group - 1);
        if (series->coverage.size() <= idx) {
            series->coverage.resize(idx + 1, 0.0);
            series->length.resize(idx + 1, 0.0);
        }
        series->coverage[idx] = cell.coverage;
        series->length[idx] = cell.avg_ci_length;
    }
    return out;
}

// Cross-fitting in red, repeated-split with baseline in black, without in
// blue; extra series fall back to a fixed palette.
inline std::string series_color(const std::string& method_id, std::size_t index) {
    if (method_id.rfind("ri_", 0) == 0 || method_id == "ri") return "#cc2222";
    if (method_id.rfind("ssri", 0) == 0) {
        if (method_id.size() >= 7 && method_id.compare(method_id.size() - 7, 7, "_nobase") == 0)
            return "#2244cc";
        return "#000000";
    }
    static const char* palette[] = {"#228833", "#ee7733", "#aa3377", "#66ccee"};
    return palette[index % 4];
}

namespace detail {

inline std::string fixed2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

inline std::string sig3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

struct Panel {
    double left, top, width, height; // plot area
    double y_min, y_max;
    int k_groups;

    double x(int group) const {
        if (k_groups <= 1) return left + width / 2.0;
        return left + width * (group - 1) / static_cast<double>(k_groups - 1);
    }
    double y(double value) const {
        const double t = (value - y_min) / (y_max - y_min);
        return top + height * (1.0 - std::clamp(t, 0.0, 1.0));
    }
};

inline void draw_frame(std::string& out, const Panel& p, const std::string& title,
                       const std::string& y_label) {
    out += "<rect x=\"" + fixed2(p.left) + "\" y=\"" + fixed2(p.top) + "\" width=\"" +
           fixed2(p.width) + "\" height=\"" + fixed2(p.height) +
           "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
    out += "<text x=\"" + fixed2(p.left) + "\" y=\"" + fixed2(p.top - 8.0) +
           "\" font-family=\"sans-serif\" font-size=\"13\" fill=\"#000000\">" + title + "</text>\n";
    out += "<text x=\"14\" y=\"" + fixed2(p.top + p.height / 2.0) +
           "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#000000\" transform=\"rotate(-90 14 " +
           fixed2(p.top + p.height / 2.0) + ")\" text-anchor=\"middle\">" + y_label + "</text>\n";
    for (int t = 0; t <= 4; ++t) {
        const double value = p.y_min + (p.y_max - p.y_min) * t / 4.0;
        const double yy = p.y(value);
        out += "<line x1=\"" + fixed2(p.left - 4.0) + "\" y1=\"" + fixed2(yy) + "\" x2=\"" +
               fixed2(p.left) + "\" y2=\"" + fixed2(yy) +
               "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
        out += "<text x=\"" + fixed2(p.left - 7.0) + "\" y=\"" + fixed2(yy + 3.5) +
               "\" font-family=\"sans-serif\" font-size=\"10\" fill=\"#000000\" text-anchor=\"end\">" +
               sig3(value) + "</text>\n";
    }
    for (int k = 1; k <= p.k_groups; ++k) {
        const double xx = p.x(k);
        out += "<line x1=\"" + fixed2(xx) + "\" y1=\"" + fixed2(p.top + p.height) + "\" x2=\"" +
               fixed2(xx) + "\" y2=\"" + fixed2(p.top + p.height + 4.0) +
               "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
        out += "<text x=\"" + fixed2(xx) + "\" y=\"" + fixed2(p.top + p.height + 16.0) +
               "\" font-family=\"sans-serif\" font-size=\"10\" fill=\"#000000\" text-anchor=\"middle\">" +
               std::to_string(k) + "</text>\n";
    }
    out += "<text x=\"" + fixed2(p.left + p.width / 2.0) + "\" y=\"" +
           fixed2(p.top + p.height + 30.0) +
           "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#000000\" text-anchor=\"middle\">sorted group</text>\n";
}

inline void draw_series(std::string& out, const Panel& p, const std::vector<double>& values,
                        const std::string& color) {
    std::string points;
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (!points.empty()) points += ' ';
        points += fixed2(p.x(static_cast<int>(k) + 1)) + ',' + fixed2(p.y(values[k]));
    }
    out += "<polyline points=\"" + points + "\" fill=\"none\" stroke=\"" + color +
           "\" stroke-width=\"1.8\"/>\n";
    for (std::size_t k = 0; k < values.size(); ++k)
        out += "<circle cx=\"" + fixed2(p.x(static_cast<int>(k) + 1)) + "\" cy=\"" +
               fixed2(p.y(values[k])) + "\" r=\"3\" fill=\"" + color + "\"/>\n";
}

} // namespace detail

// Two stacked panels for one sample size: empirical coverage on top (with a
// dashed line at the nominal level) and average CI length below. Bytes depend
// only on the inputs.
inline std::string render_coverage_length_svg(const std::vector<MethodSeries>& series,
                                              int k_groups, double alpha, int n) {
    if (series.empty()) throw std::invalid_argument("no series to plot");
    for (const auto& s : series)
        if (static_cast<int>(s.coverage.size()) != k_groups ||
            static_cast<int>(s.length.size()) != k_groups)
            throw std::invalid_argument("series '" + s.method_id + "' does not cover " +
                                        std::to_string(k_groups) + " groups");

    const double width = 640.0, height = 600.0;
    detail::Panel cov{60.0, 34.0, width - 60.0 - 170.0, 210.0, 0.0, 1.0, k_groups};
    detail::Panel len{60.0, 34.0 + 210.0 + 62.0, width - 60.0 - 170.0, 210.0, 0.0, 1.0, k_groups};
    double max_len = 0.0;
    for (const auto& s : series)
        for (double v : s.length) max_len = std::max(max_len, v);
    len.y_max = max_len > 0.0 ? max_len * 1.08 : 1.0;

    std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
           detail::fixed2(width) + "\" height=\"" + detail::fixed2(height) + "\" viewBox=\"0 0 " +
           detail::fixed2(width) + ' ' + detail::fixed2(height) + "\">\n";
    out += "<rect x=\"0\" y=\"0\" width=\"" + detail::fixed2(width) + "\" height=\"" +
           detail::fixed2(height) + "\" fill=\"#ffffff\"/>\n";

    draw_frame(out, cov, "empirical coverage, n=" + std::to_string(n), "coverage");
    const double nominal = 1.0 - alpha;
    out += "<line x1=\"" + detail::fixed2(cov.left) + "\" y1=\"" + detail::fixed2(cov.y(nominal)) +
           "\" x2=\"" + detail::fixed2(cov.left + cov.width) + "\" y2=\"" +
           detail::fixed2(cov.y(nominal)) +
           "\" stroke=\"#888888\" stroke-width=\"1\" stroke-dasharray=\"6 4\"/>\n";
    out += "<text x=\"" + detail::fixed2(cov.left + cov.width - 4.0) + "\" y=\"" +
           detail::fixed2(cov.y(nominal) - 5.0) +
           "\" font-family=\"sans-serif\" font-size=\"10\" fill=\"#888888\" text-anchor=\"end\">nominal " +
           detail::sig3(nominal) + "</text>\n";
    for (std::size_t i = 0; i < series.size(); ++i)
        detail::draw_series(out, cov, series[i].coverage, series_color(series[i].method_id, i));

    draw_frame(out, len, "average CI length, n=" + std::to_string(n), "length");
    for (std::size_t i = 0; i < series.size(); ++i)
        detail::draw_series(out, len, series[i].length, series_color(series[i].method_id, i));

    const double legend_x = cov.left + cov.width + 16.0;
    for (std::size_t i = 0; i < series.size(); ++i) {
        const double yy = cov.top + 10.0 + 18.0 * static_cast<double>(i);
        const auto color = series_color(series[i].method_id, i);
        out += "<line x1=\"" + detail::fixed2(legend_x) + "\" y1=\"" + detail::fixed2(yy) +
               "\" x2=\"" + detail::fixed2(legend_x + 22.0) + "\" y2=\"" + detail::fixed2(yy) +
               "\" stroke=\"" + color + "\" stroke-width=\"1.8\"/>\n";
        out += "<circle cx=\"" + detail::fixed2(legend_x + 11.0) + "\" cy=\"" + detail::fixed2(yy) +
               "\" r=\"3\" fill=\"" + color + "\"/>\n";
        out += "<text x=\"" + detail::fixed2(legend_x + 28.0) + "\" y=\"" + detail::fixed2(yy + 3.5) +
               "\" font-family=\"sans-serif\" font-size=\"10\" fill=\"#000000\">" +
               series[i].method_id + "</text>\n";
    }

    out += "</svg>\n";
    return out;
}

} // namespace splitgates::svg
