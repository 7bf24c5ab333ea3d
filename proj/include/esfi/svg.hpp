#pragma once

// Minimal SVG line and bar charts: axes with tick labels, polylines or star
// markers, legend. Enough to eyeball trajectories, fits and PRCC bars.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

namespace esfi::svg {

enum class Style { Line, Stars };

struct Series {
    std::string name;
    std::string color;
    std::vector<double> x;
    std::vector<double> y;
    Style style = Style::Line;
};

struct Chart {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Series> series;
    int width = 720;
    int height = 440;
};

namespace detail {

inline std::string escape(const std::string& s) {
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

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

inline std::string tick_label(double v) {
    char buf[32];
    if (v != 0.0 && (std::abs(v) >= 1e5 || std::abs(v) < 1e-3))
        std::snprintf(buf, sizeof(buf), "%.1e", v);
    else
        std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

/// Roughly five "nice" ticks spanning [lo, hi].
inline std::vector<double> nice_ticks(double lo, double hi) {
    if (!(hi > lo)) return {lo};
    const double raw = (hi - lo) / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (raw <= m * mag) {
            step = m * mag;
            break;
        }
    std::vector<double> t;
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step)
        t.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
    return t;
}

struct Frame {
    double left = 80, right = 160, top = 40, bottom = 60;
    double w, h, x0, x1, y0, y1;

    double px(double x) const { return left + (x - x0) / (x1 - x0) * (w - left - right); }
    double py(double y) const { return h - bottom - (y - y0) / (y1 - y0) * (h - top - bottom); }
};

inline void axes(std::ostringstream& o, const Frame& f, const std::string& title,
                 const std::string& xl, const std::string& yl, bool x_ticks = true) {
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << num(f.w / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
      << escape(title) << "</text>\n";
    o << "<line x1=\"" << num(f.left) << "\" y1=\"" << num(f.h - f.bottom) << "\" x2=\""
      << num(f.w - f.right) << "\" y2=\"" << num(f.h - f.bottom) << "\" stroke=\"black\"/>\n";
    o << "<line x1=\"" << num(f.left) << "\" y1=\"" << num(f.top) << "\" x2=\"" << num(f.left)
      << "\" y2=\"" << num(f.h - f.bottom) << "\" stroke=\"black\"/>\n";
    if (x_ticks)
        for (double t : nice_ticks(f.x0, f.x1)) {
            o << "<line x1=\"" << num(f.px(t)) << "\" y1=\"" << num(f.h - f.bottom) << "\" x2=\""
              << num(f.px(t)) << "\" y2=\"" << num(f.h - f.bottom + 5) << "\" stroke=\"black\"/>\n";
            o << "<text x=\"" << num(f.px(t)) << "\" y=\"" << num(f.h - f.bottom + 18)
              << "\" text-anchor=\"middle\" font-size=\"11\">" << tick_label(t) << "</text>\n";
        }
    for (double t : nice_ticks(f.y0, f.y1)) {
        o << "<line x1=\"" << num(f.left - 5) << "\" y1=\"" << num(f.py(t)) << "\" x2=\""
          << num(f.left) << "\" y2=\"" << num(f.py(t)) << "\" stroke=\"black\"/>\n";
        o << "<text x=\"" << num(f.left - 8) << "\" y=\"" << num(f.py(t) + 4)
          << "\" text-anchor=\"end\" font-size=\"11\">" << tick_label(t) << "</text>\n";
    }
    o << "<text x=\"" << num((f.left + f.w - f.right) / 2) << "\" y=\"" << num(f.h - 15)
      << "\" text-anchor=\"middle\" font-size=\"13\">" << escape(xl) << "</text>\n";
    o << "<text transform=\"translate(18," << num((f.top + f.h - f.bottom) / 2)
      << ") rotate(-90)\" text-anchor=\"middle\" font-size=\"13\">" << escape(yl) << "</text>\n";
}

inline std::string star(double cx, double cy, double r) {
    std::ostringstream pts;
    for (int k = 0; k < 10; ++k) {
        const double ang = -std::numbers::pi / 2 + k * std::numbers::pi / 5;
        const double rr = (k % 2 == 0) ? r : r * 0.45;
        if (k) pts << ' ';
        pts << num(cx + rr * std::cos(ang)) << ',' << num(cy + rr * std::sin(ang));
    }
    return pts.str();
}

} // namespace detail

inline std::string render(const Chart& chart) {
    using detail::num;
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = 0.0, ymax = -std::numeric_limits<double>::infinity();
    for (const auto& s : chart.series)
        for (std::size_t k = 0; k < std::min(s.x.size(), s.y.size()); ++k) {
            if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k])) continue;
            xmin = std::min(xmin, s.x[k]);
            xmax = std::max(xmax, s.x[k]);
            ymin = std::min(ymin, s.y[k]);
            ymax = std::max(ymax, s.y[k]);
        }
    if (!std::isfinite(xmin)) xmin = 0.0, xmax = 1.0;
    if (!(xmax > xmin)) xmax = xmin + 1.0;
    if (!std::isfinite(ymax) || !(ymax > ymin)) ymax = ymin + 1.0;
    ymax += 0.05 * (ymax - ymin);

    detail::Frame f;
    f.w = chart.width;
    f.h = chart.height;
    f.x0 = xmin;
    f.x1 = xmax;
    f.y0 = ymin;
    f.y1 = ymax;

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << chart.width << "\" height=\""
      << chart.height << "\" font-family=\"sans-serif\">\n";
    detail::axes(o, f, chart.title, chart.x_label, chart.y_label);

    for (const auto& s : chart.series) {
        const std::size_t n = std::min(s.x.size(), s.y.size());
        if (s.style == Style::Line) {
            o << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"2\" points=\"";
            bool first = true;
            for (std::size_t k = 0; k < n; ++k) {
                if (!std::isfinite(s.y[k])) continue;
                o << (first ? "" : " ") << num(f.px(s.x[k])) << ',' << num(f.py(s.y[k]));
                first = false;
            }
            o << "\"/>\n";
        } else {
            for (std::size_t k = 0; k < n; ++k)
                if (std::isfinite(s.y[k]))
                    o << "<polygon fill=\"" << s.color << "\" points=\""
                      << detail::star(f.px(s.x[k]), f.py(s.y[k]), 6) << "\"/>\n";
        }
    }

    double ly = f.top + 10;
    for (const auto& s : chart.series) {
        const double lx = f.w - f.right + 15;
        if (s.style == Style::Line)
            o << "<line x1=\"" << num(lx) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(lx + 24)
              << "\" y2=\"" << num(ly) << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n";
        else
            o << "<polygon fill=\"" << s.color << "\" points=\"" << detail::star(lx + 12, ly, 6)
              << "\"/>\n";
        o << "<text x=\"" << num(lx + 30) << "\" y=\"" << num(ly + 4) << "\" font-size=\"12\">"
          << detail::escape(s.name) << "</text>\n";
        ly += 20;
    }
    o << "</svg>\n";
    return o.str();
}

struct Bar {
    std::string label;
    double value = 0.0; // NaN draws an empty slot
};

/// Vertical bars in [-1, 1] with dashed reference lines at +/- each threshold.
inline std::string render_bars(const std::string& title, const std::vector<Bar>& bars,
                               const std::vector<double>& thresholds) {
    using detail::num;
    detail::Frame f;
    f.w = 720;
    f.h = 440;
    f.right = 40;
    f.x0 = 0.0;
    f.x1 = double(std::max<std::size_t>(bars.size(), 1));
    f.y0 = -1.0;
    f.y1 = 1.0;

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"440\" "
         "font-family=\"sans-serif\">\n";
    detail::axes(o, f, title, "parameter", "PRCC", false);
    o << "<line x1=\"" << num(f.left) << "\" y1=\"" << num(f.py(0)) << "\" x2=\""
      << num(f.w - f.right) << "\" y2=\"" << num(f.py(0)) << "\" stroke=\"black\"/>\n";
    for (double t : thresholds)
        for (double s : {t, -t})
            o << "<line x1=\"" << num(f.left) << "\" y1=\"" << num(f.py(s)) << "\" x2=\""
              << num(f.w - f.right) << "\" y2=\"" << num(f.py(s))
              << "\" stroke=\"gray\" stroke-dasharray=\"4,4\"/>\n";
    for (std::size_t k = 0; k < bars.size(); ++k) {
        const double xa = f.px(double(k) + 0.15), xb = f.px(double(k) + 0.85);
        const double v = bars[k].value;
        if (std::isfinite(v)) {
            const double ya = f.py(std::max(v, 0.0)), yb = f.py(std::min(v, 0.0));
            o << "<rect x=\"" << num(xa) << "\" y=\"" << num(ya) << "\" width=\"" << num(xb - xa)
              << "\" height=\"" << num(yb - ya) << "\" fill=\"" << (v >= 0 ? "#1f77b4" : "#d62728")
              << "\"/>\n";
        }
        o << "<text x=\"" << num((xa + xb) / 2) << "\" y=\"" << num(f.h - f.bottom + 18)
          << "\" text-anchor=\"middle\" font-size=\"11\">" << detail::escape(bars[k].label)
          << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

} // namespace esfi::svg
