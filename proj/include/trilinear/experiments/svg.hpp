// svg.hpp — self-contained SVG line charts, one per record panel
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "record.hpp"

namespace trilinear::experiments {

namespace detail {

inline std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

inline std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// Tick positions at 1, 2 or 5 times a power of ten.
inline std::vector<double> nice_ticks(double lo, double hi, int target = 5) {
    if (!(hi > lo)) return {lo};
    const double raw = (hi - lo) / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        step = m * mag;
        if (step >= raw) break;
    }
    std::vector<double> t;
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step) t.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
    return t;
}

inline const char* series_color(std::size_t k) {
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#17becf", "#7f7f7f", "#bcbd22"};
    return palette[k % (sizeof palette / sizeof palette[0])];
}

}  // namespace detail

struct SvgStyle {
    int width = 720;
    int panel_height = 380;
    int margin_left = 80;
    int margin_right = 190;
    int margin_top = 40;
    int margin_bottom = 55;
};

// One chart per panel stacked vertically; each series is one polyline.
// Non-finite points break a series into separate polylines.
inline std::string render_svg(const ResultRecord& rec, const SvgStyle& st = {}) {
    using detail::fmt;
    using detail::xml_escape;
    std::vector<Panel> panels = rec.panels;
    if (panels.empty() && rec.columns.size() > 1) {
        Panel p{rec.experiment, rec.columns.front().name, {}, "value"};
        for (std::size_t c = 1; c < rec.columns.size(); ++c) p.series.push_back(rec.columns[c].name);
        panels.push_back(p);
    }
    const int h_total = std::max<int>(1, static_cast<int>(panels.size())) * st.panel_height;
    std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(st.width) + "\" height=\"" + std::to_string(h_total) +
           "\" viewBox=\"0 0 " + std::to_string(st.width) + " " + std::to_string(h_total) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    for (std::size_t pi = 0; pi < panels.size(); ++pi) {
        const Panel& p = panels[pi];
        const auto& x = rec.column(p.x_column);
        const double top = static_cast<double>(pi) * st.panel_height;
        const double x0 = st.margin_left, x1 = st.width - st.margin_right;
        const double y0 = top + st.panel_height - st.margin_bottom, y1 = top + st.margin_top;

        double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
        for (const auto& s : p.series) {
            const auto& y = rec.column(s);
            for (std::size_t i = 0; i < y.size(); ++i) {
                if (!std::isfinite(x[i]) || !std::isfinite(y[i])) continue;
                xmin = std::min(xmin, x[i]), xmax = std::max(xmax, x[i]);
                ymin = std::min(ymin, y[i]), ymax = std::max(ymax, y[i]);
            }
        }
        if (!std::isfinite(xmin)) xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
        if (xmax == xmin) xmax = xmin + 1.0;
        if (ymax == ymin) ymin -= 0.5, ymax += 0.5;
        const double pad = 0.05 * (ymax - ymin);
        ymin -= pad, ymax += pad;
        auto sx = [&](double v) { return x0 + (v - xmin) / (xmax - xmin) * (x1 - x0); };
        auto sy = [&](double v) { return y0 - (v - ymin) / (ymax - ymin) * (y0 - y1); };

        out += "<g>\n<text x=\"" + fmt("%.1f", (x0 + x1) / 2) + "\" y=\"" + fmt("%.1f", top + 22) +
               "\" text-anchor=\"middle\" font-size=\"14\">" + xml_escape(p.title) + "</text>\n";
        out += "<rect x=\"" + fmt("%.1f", x0) + "\" y=\"" + fmt("%.1f", y1) + "\" width=\"" + fmt("%.1f", x1 - x0) + "\" height=\"" +
               fmt("%.1f", y0 - y1) + "\" fill=\"none\" stroke=\"black\"/>\n";
        for (double t : detail::nice_ticks(xmin, xmax)) {
            const double px = sx(t);
            out += "<line x1=\"" + fmt("%.1f", px) + "\" y1=\"" + fmt("%.1f", y0) + "\" x2=\"" + fmt("%.1f", px) + "\" y2=\"" +
                   fmt("%.1f", y0 + 5) + "\" stroke=\"black\"/>\n";
            out += "<text x=\"" + fmt("%.1f", px) + "\" y=\"" + fmt("%.1f", y0 + 18) + "\" text-anchor=\"middle\">" + fmt("%g", t) + "</text>\n";
        }
        for (double t : detail::nice_ticks(ymin, ymax)) {
            const double py = sy(t);
            out += "<line x1=\"" + fmt("%.1f", x0 - 5) + "\" y1=\"" + fmt("%.1f", py) + "\" x2=\"" + fmt("%.1f", x0) + "\" y2=\"" +
                   fmt("%.1f", py) + "\" stroke=\"black\"/>\n";
            out += "<text x=\"" + fmt("%.1f", x0 - 8) + "\" y=\"" + fmt("%.1f", py + 4) + "\" text-anchor=\"end\">" + fmt("%g", t) + "</text>\n";
        }
        out += "<text class=\"x-label\" x=\"" + fmt("%.1f", (x0 + x1) / 2) + "\" y=\"" + fmt("%.1f", y0 + 40) +
               "\" text-anchor=\"middle\">" + xml_escape(p.x_column) + "</text>\n";
        out += "<text class=\"y-label\" transform=\"translate(" + fmt("%.1f", x0 - 60) + "," + fmt("%.1f", (y0 + y1) / 2) +
               ") rotate(-90)\" text-anchor=\"middle\">" + xml_escape(p.y_label) + "</text>\n";

        for (std::size_t k = 0; k < p.series.size(); ++k) {
            const auto& y = rec.column(p.series[k]);
            std::string pts;
            auto flush = [&]() {
                if (!pts.empty()) {
                    out += "<polyline data-series=\"" + xml_escape(p.series[k]) + "\" fill=\"none\" stroke=\"" + detail::series_color(k) +
                           "\" stroke-width=\"1.8\" points=\"" + pts + "\"/>\n";
                }
                pts.clear();
            };
            for (std::size_t i = 0; i < y.size(); ++i) {
                if (!std::isfinite(x[i]) || !std::isfinite(y[i])) {
                    flush();
                    continue;
                }
                if (!pts.empty()) pts += ' ';
                pts += fmt("%.2f", sx(x[i])) + "," + fmt("%.2f", sy(y[i]));
            }
            flush();
            const double ly = y1 + 16.0 * static_cast<double>(k) + 8.0;
            out += "<line x1=\"" + fmt("%.1f", x1 + 12) + "\" y1=\"" + fmt("%.1f", ly) + "\" x2=\"" + fmt("%.1f", x1 + 36) + "\" y2=\"" +
                   fmt("%.1f", ly) + "\" stroke=\"" + detail::series_color(k) + "\" stroke-width=\"2\"/>\n";
            out += "<text x=\"" + fmt("%.1f", x1 + 42) + "\" y=\"" + fmt("%.1f", ly + 4) + "\">" + xml_escape(p.series[k]) + "</text>\n";
        }
        out += "</g>\n";
    }
    out += "</svg>\n";
    return out;
}

}  // namespace trilinear::experiments
