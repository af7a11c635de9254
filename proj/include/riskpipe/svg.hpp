#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "riskpipe/embedding.hpp"
#include "riskpipe/matrix.hpp"

namespace riskpipe {

/// Linear two-stop color ramp (blue -> red) over [lo, hi], clamped.
inline std::array<int, 3> risk_color(double v, double lo, double hi) {
    constexpr std::array<int, 3> kLow{44, 123, 182};
    constexpr std::array<int, 3> kHigh{215, 25, 28};
    double t = hi > lo ? (v - lo) / (hi - lo) : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    std::array<int, 3> c{};
    for (int i = 0; i < 3; ++i) {
        c[i] = static_cast<int>(std::lround(kLow[i] + t * (kHigh[i] - kLow[i])));
    }
    return c;
}

inline std::string hex_color(const std::array<int, 3>& c) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", c[0], c[1], c[2]);
    return buf;
}

/// Uniform-bin histogram counts over [min, max]; the max value lands in the
/// last bin.
inline std::vector<std::size_t> histogram_counts(const Vector& values, std::size_t bins) {
    if (bins < 1) throw ArgumentError("histogram needs bins >= 1");
    if (values.empty()) throw ArgumentError("histogram needs values");
    const auto [mn_it, mx_it] = std::minmax_element(values.begin(), values.end());
    const double mn = *mn_it, mx = *mx_it;
    std::vector<std::size_t> counts(bins, 0);
    if (mx == mn) {
        counts[0] = values.size();
        return counts;
    }
    for (double v : values) {
        auto b = static_cast<std::size_t>((v - mn) / (mx - mn) * static_cast<double>(bins));
        if (b >= bins) b = bins - 1;
        counts[b]++;
    }
    return counts;
}

namespace detail {

inline std::string f2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

inline std::string g3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

struct SvgCanvas {
    static constexpr double kWidth = 640, kHeight = 480;
    static constexpr double kLeft = 62, kRight = 100, kTop = 42, kBottom = 52;
    std::ostringstream body;

    double plot_w() const { return kWidth - kLeft - kRight; }
    double plot_h() const { return kHeight - kTop - kBottom; }

    void open(const std::string& title) {
        body << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
             << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
        body << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
        if (!title.empty()) {
            body << "<text x=\"" << kWidth / 2
                 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
                    "font-size=\"15\">"
                 << title << "</text>\n";
        }
        body << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w()
             << "\" height=\"" << plot_h()
             << "\" fill=\"none\" stroke=\"#444444\" stroke-width=\"1\"/>\n";
    }

    void axis_labels(const std::string& xlabel, const std::string& ylabel) {
        body << "<text x=\"" << kLeft + plot_w() / 2 << "\" y=\"" << kHeight - 10
             << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << xlabel
             << "</text>\n";
        body << "<text x=\"16\" y=\"" << kTop + plot_h() / 2
             << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
                "transform=\"rotate(-90 16 "
             << kTop + plot_h() / 2 << ")\">" << ylabel << "</text>\n";
    }

    void x_tick(double px, const std::string& label) {
        body << "<line x1=\"" << f2(px) << "\" y1=\"" << kTop + plot_h() << "\" x2=\"" << f2(px)
             << "\" y2=\"" << kTop + plot_h() + 5 << "\" stroke=\"#444444\"/>\n";
        body << "<text x=\"" << f2(px) << "\" y=\"" << kTop + plot_h() + 18
             << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" << label
             << "</text>\n";
    }

    void y_tick(double py, const std::string& label) {
        body << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << f2(py) << "\" x2=\"" << kLeft
             << "\" y2=\"" << f2(py) << "\" stroke=\"#444444\"/>\n";
        body << "<text x=\"" << kLeft - 8 << "\" y=\"" << f2(py + 3)
             << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << label
             << "</text>\n";
    }

    void write(const std::filesystem::path& path) {
        body << "</svg>\n";
        std::ofstream out(path, std::ios::binary);
        if (!out) throw IoError("cannot write " + path.string());
        out << body.str();
        if (!out) throw IoError("write failed: " + path.string());
    }
};

}  // namespace detail

/// Scatter plot of a 2-D embedding: one circle per point colored by a
/// continuous ramp over color_domain (risk range [4,16] by default), optional
/// X glyphs at centroids, axes and a color legend.
inline void emit_scatter_svg(const Embedding& e, const Vector& colors, const Matrix* centroids,
                             const std::filesystem::path& path, const std::string& title = "",
                             const std::string& xlabel = "dim 1",
                             const std::string& ylabel = "dim 2",
                             std::pair<double, double> color_domain = {4.0, 16.0}) {
    const std::size_t n = e.points.rows();
    if (colors.size() != n) throw ShapeError("emit_scatter_svg: colors length != N");
    if (e.points.cols() != 2) throw ShapeError("emit_scatter_svg: embedding must be N x 2");

    double xmin = e.points(0, 0), xmax = xmin, ymin = e.points(0, 1), ymax = ymin;
    for (std::size_t i = 0; i < n; ++i) {
        xmin = std::min(xmin, e.points(i, 0));
        xmax = std::max(xmax, e.points(i, 0));
        ymin = std::min(ymin, e.points(i, 1));
        ymax = std::max(ymax, e.points(i, 1));
    }
    if (centroids) {
        for (std::size_t c = 0; c < centroids->rows(); ++c) {
            xmin = std::min(xmin, (*centroids)(c, 0));
            xmax = std::max(xmax, (*centroids)(c, 0));
            ymin = std::min(ymin, (*centroids)(c, 1));
            ymax = std::max(ymax, (*centroids)(c, 1));
        }
    }
    double xpad = 0.05 * (xmax - xmin), ypad = 0.05 * (ymax - ymin);
    if (xpad == 0.0) xpad = 1.0;
    if (ypad == 0.0) ypad = 1.0;
    xmin -= xpad;
    xmax += xpad;
    ymin -= ypad;
    ymax += ypad;

    detail::SvgCanvas svg;
    svg.open(title);
    auto px = [&](double x) { return svg.kLeft + (x - xmin) / (xmax - xmin) * svg.plot_w(); };
    auto py = [&](double y) { return svg.kTop + (1.0 - (y - ymin) / (ymax - ymin)) * svg.plot_h(); };

    for (int t = 0; t <= 4; ++t) {
        const double fx = xmin + (xmax - xmin) * t / 4.0;
        const double fy = ymin + (ymax - ymin) * t / 4.0;
        svg.x_tick(px(fx), detail::g3(fx));
        svg.y_tick(py(fy), detail::g3(fy));
    }
    svg.axis_labels(xlabel, ylabel);

    for (std::size_t i = 0; i < n; ++i) {
        svg.body << "<circle cx=\"" << detail::f2(px(e.points(i, 0))) << "\" cy=\""
                 << detail::f2(py(e.points(i, 1))) << "\" r=\"3\" fill=\""
                 << hex_color(risk_color(colors[i], color_domain.first, color_domain.second))
                 << "\" fill-opacity=\"0.8\"/>\n";
    }

    if (centroids) {
        for (std::size_t c = 0; c < centroids->rows(); ++c) {
            const double cx = px((*centroids)(c, 0)), cy = py((*centroids)(c, 1));
            svg.body << "<path class=\"centroid\" d=\"M " << detail::f2(cx - 7) << " "
                     << detail::f2(cy - 7) << " L " << detail::f2(cx + 7) << " "
                     << detail::f2(cy + 7) << " M " << detail::f2(cx - 7) << " "
                     << detail::f2(cy + 7) << " L " << detail::f2(cx + 7) << " "
                     << detail::f2(cy - 7)
                     << "\" stroke=\"black\" stroke-width=\"2.5\" fill=\"none\"/>\n";
        }
    }

    // color legend
    const double lx = svg.kWidth - svg.kRight + 22, ly = svg.kTop, lh = svg.plot_h() * 0.6;
    svg.body << "<defs><linearGradient id=\"ramp\" x1=\"0\" y1=\"1\" x2=\"0\" y2=\"0\">"
             << "<stop offset=\"0\" stop-color=\""
             << hex_color(risk_color(color_domain.first, color_domain.first, color_domain.second))
             << "\"/><stop offset=\"1\" stop-color=\""
             << hex_color(risk_color(color_domain.second, color_domain.first, color_domain.second))
             << "\"/></linearGradient></defs>\n";
    svg.body << "<rect x=\"" << lx << "\" y=\"" << ly << "\" width=\"14\" height=\"" << lh
             << "\" fill=\"url(#ramp)\" stroke=\"#444444\"/>\n";
    svg.body << "<text x=\"" << lx + 20 << "\" y=\"" << ly + 8
             << "\" font-family=\"sans-serif\" font-size=\"10\">" << detail::g3(color_domain.second)
             << "</text>\n";
    svg.body << "<text x=\"" << lx + 20 << "\" y=\"" << ly + lh
             << "\" font-family=\"sans-serif\" font-size=\"10\">" << detail::g3(color_domain.first)
             << "</text>\n";
    svg.body << "<text x=\"" << lx << "\" y=\"" << ly + lh + 18
             << "\" font-family=\"sans-serif\" font-size=\"10\">risk</text>\n";

    svg.write(path);
}

/// Bar chart of histogram counts with uniform bins over [min, max].
inline void emit_histogram_svg(const Vector& values, std::size_t bins,
                               const std::filesystem::path& path, const std::string& title = "",
                               const std::string& xlabel = "value",
                               const std::string& ylabel = "count") {
    const std::vector<std::size_t> counts = histogram_counts(values, bins);
    const auto [mn_it, mx_it] = std::minmax_element(values.begin(), values.end());
    const double mn = *mn_it, mx = *mx_it;
    std::size_t cmax = 1;
    for (std::size_t c : counts) cmax = std::max(cmax, c);

    detail::SvgCanvas svg;
    svg.open(title);
    const double bar_w = svg.plot_w() / static_cast<double>(bins);
    for (std::size_t b = 0; b < bins; ++b) {
        const double h = svg.plot_h() * static_cast<double>(counts[b]) / static_cast<double>(cmax);
        svg.body << "<rect class=\"bar\" x=\"" << detail::f2(svg.kLeft + bar_w * b) << "\" y=\""
                 << detail::f2(svg.kTop + svg.plot_h() - h) << "\" width=\"" << detail::f2(bar_w)
                 << "\" height=\"" << detail::f2(h)
                 << "\" fill=\"#2c7bb6\" stroke=\"white\" stroke-width=\"0.5\"/>\n";
    }
    for (int t = 0; t <= 4; ++t) {
        const double fx = mn + (mx - mn) * t / 4.0;
        svg.x_tick(svg.kLeft + svg.plot_w() * t / 4.0, detail::g3(fx));
        const double fc = static_cast<double>(cmax) * t / 4.0;
        svg.y_tick(svg.kTop + svg.plot_h() * (1.0 - t / 4.0), detail::g3(fc));
    }
    svg.axis_labels(xlabel, ylabel);
    svg.write(path);
}

}  // namespace riskpipe
