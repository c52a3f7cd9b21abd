#include "audit/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "audit/error.hpp"
#include "audit/text.hpp"

namespace audit {

namespace {

constexpr double kLeft = 90.0;
constexpr double kRight = 740.0;
constexpr double kTop = 70.0;
constexpr double kBottom = 520.0;
constexpr int kTicks = 5;

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string num(double v) { return format_fixed(v, 2); }

std::string tick_label(double v) {
    if (std::abs(v) < 1e-12) v = 0.0;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

struct Range {
    double lo;
    double hi;
};

// Degenerate ranges are widened symmetrically so constant data sits mid-axis.
Range padded_range(double lo, double hi) {
    if (hi > lo) return {lo, hi};
    const double pad = std::max(std::abs(lo) * 0.5, 1.0);
    return {lo - pad, hi + pad};
}

double map(double v, Range r, double a, double b) { return a + (v - r.lo) / (r.hi - r.lo) * (b - a); }

class Writer {
public:
    explicit Writer(const std::string& title) {
        out_ << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
             << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << kCanvasWidth << "\" height=\""
             << kCanvasHeight << "\" viewBox=\"0 0 " << kCanvasWidth << ' ' << kCanvasHeight << "\">\n"
             << "<g id=\"chart\" font-family=\"sans-serif\" font-size=\"12\">\n"
             << "<title>" << escape(title) << "</title>\n"
             << "<rect x=\"0\" y=\"0\" width=\"" << kCanvasWidth << "\" height=\"" << kCanvasHeight
             << "\" fill=\"#ffffff\"/>\n";
        text(kCanvasWidth / 2.0, 36.0, title, "middle", 16);
    }

    void text(double x, double y, const std::string& s, const char* anchor, int size = 12,
              const char* fill = "#000000", const char* extra = "") {
        out_ << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" text-anchor=\"" << anchor << "\" font-size=\""
             << size << "\" fill=\"" << fill << '"' << extra << '>' << escape(s) << "</text>\n";
    }

    void line(double x1, double y1, double x2, double y2, const char* stroke = "#000000") {
        out_ << "<line x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(x2) << "\" y2=\"" << num(y2)
             << "\" stroke=\"" << stroke << "\" stroke-width=\"1\"/>\n";
    }

    void rect(double x, double y, double w, double h, const std::string& fill, const char* stroke = "none") {
        out_ << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(w) << "\" height=\"" << num(h)
             << "\" fill=\"" << fill << "\" stroke=\"" << stroke << "\"/>\n";
    }

    void raw(const std::string& s) { out_ << s; }

    void axes(Range xr, Range yr, const std::string& x_label, const std::string& y_label) {
        line(kLeft, kBottom, kRight, kBottom);
        line(kLeft, kTop, kLeft, kBottom);
        for (int i = 0; i < kTicks; ++i) {
            const double f = static_cast<double>(i) / (kTicks - 1);
            const double xv = xr.lo + f * (xr.hi - xr.lo);
            const double yv = yr.lo + f * (yr.hi - yr.lo);
            const double px = map(xv, xr, kLeft, kRight);
            const double py = map(yv, yr, kBottom, kTop);
            line(px, kBottom, px, kBottom + 6);
            text(px, kBottom + 20, tick_label(xv), "middle");
            line(kLeft - 6, py, kLeft, py);
            text(kLeft - 10, py + 4, tick_label(yv), "end");
        }
        if (!x_label.empty()) text((kLeft + kRight) / 2, kBottom + 45, x_label, "middle", 13);
        if (!y_label.empty()) {
            const std::string rot = " transform=\"rotate(-90 24 " + num((kTop + kBottom) / 2) + ")\"";
            text(24, (kTop + kBottom) / 2, y_label, "middle", 13, "#000000", rot.c_str());
        }
    }

    void legend(const std::vector<std::string>& names) {
        const auto& colors = color_cycle();
        for (std::size_t i = 0; i < names.size(); ++i) {
            const double y = kTop + 10 + 22.0 * static_cast<double>(i);
            rect(kRight + 30, y - 10, 14, 14, colors[i % colors.size()]);
            text(kRight + 52, y + 2, names[i], "start");
        }
    }

    SvgDocument finish() {
        out_ << "</g>\n</svg>\n";
        return SvgDocument{out_.str()};
    }

private:
    std::ostringstream out_;
};

void check_finite(double v) {
    if (!std::isfinite(v)) throw DataError("chart data must be finite");
}

}  // namespace

const std::vector<std::string>& color_cycle() {
    static const std::vector<std::string> colors = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    return colors;
}

SvgDocument render_line_chart(const LineChart& chart) {
    if (chart.series.empty()) throw DataError("line chart needs at least one series");
    double x_lo = INFINITY, x_hi = -INFINITY, y_lo = INFINITY, y_hi = -INFINITY;
    for (const auto& s : chart.series) {
        if (s.y.empty()) throw DataError("series '" + s.name + "' is empty");
        if (s.x.size() != s.y.size()) throw DimensionError("series '" + s.name + "' has mismatched x and y");
        for (std::size_t i = 0; i < s.y.size(); ++i) {
            check_finite(s.x[i]);
            check_finite(s.y[i]);
            x_lo = std::min(x_lo, s.x[i]);
            x_hi = std::max(x_hi, s.x[i]);
            y_lo = std::min(y_lo, s.y[i]);
            y_hi = std::max(y_hi, s.y[i]);
        }
    }
    const Range xr = padded_range(x_lo, x_hi);
    const Range yr = padded_range(y_lo, y_hi);

    Writer w(chart.title);
    w.axes(xr, yr, chart.x_label, chart.y_label);
    const auto& colors = color_cycle();
    std::vector<std::string> names;
    for (std::size_t k = 0; k < chart.series.size(); ++k) {
        const auto& s = chart.series[k];
        names.push_back(s.name);
        std::string pts;
        for (std::size_t i = 0; i < s.y.size(); ++i) {
            if (i) pts += ' ';
            pts += num(map(s.x[i], xr, kLeft, kRight)) + ',' + num(map(s.y[i], yr, kBottom, kTop));
        }
        w.raw("<polyline fill=\"none\" stroke=\"" + colors[k % colors.size()] + "\" stroke-width=\"1.5\" points=\"" +
              pts + "\"/>\n");
    }
    w.legend(names);
    return w.finish();
}

SvgDocument render_heatmap(const Heatmap& map_data) {
    const std::size_t n = map_data.values.size();
    if (n == 0) throw DataError("heatmap needs a non-empty matrix");
    if (map_data.labels.size() != n) throw DimensionError("heatmap labels do not match the matrix");
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& row : map_data.values) {
        if (row.size() != n) throw DimensionError("heatmap matrix must be square");
        for (double v : row) {
            check_finite(v);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    const Range r = hi > lo ? Range{lo, hi} : Range{lo, lo + 1.0};

    Writer w(map_data.title);
    const double side = std::min(kRight - kLeft - 60, kBottom - kTop) / static_cast<double>(n);
    const double x0 = kLeft + 60;
    const double y0 = kTop;
    // intensity 0 -> light (#f7fbff), 1 -> dark (#08306b)
    auto shade = [&](double v) {
        const double t = std::clamp((v - r.lo) / (r.hi - r.lo), 0.0, 1.0);
        auto mix = [t](int a, int b) { return static_cast<int>(std::lround(a + t * (b - a))); };
        char buf[8];
        std::snprintf(buf, sizeof buf, "#%02x%02x%02x", mix(0xf7, 0x08), mix(0xfb, 0x30), mix(0xff, 0x6b));
        return std::pair<std::string, bool>{buf, t > 0.5};
    };
    for (std::size_t i = 0; i < n; ++i) {
        const double cy = y0 + side * static_cast<double>(i);
        w.text(x0 - 8, cy + side / 2 + 4, map_data.labels[i], "end");
        for (std::size_t j = 0; j < n; ++j) {
            const double cx = x0 + side * static_cast<double>(j);
            const auto [fill, dark] = shade(map_data.values[i][j]);
            w.rect(cx, cy, side, side, fill, "#ffffff");
            w.text(cx + side / 2, cy + side / 2 + 4, tick_label(map_data.values[i][j]), "middle", 11,
                   dark ? "#ffffff" : "#000000");
        }
    }
    for (std::size_t j = 0; j < n; ++j) {
        const double cx = x0 + side * (static_cast<double>(j) + 0.5);
        const double cy = y0 + side * static_cast<double>(n) + 16;
        const std::string rot = " transform=\"rotate(30 " + num(cx) + ' ' + num(cy) + ")\"";
        w.text(cx, cy, map_data.labels[j], "start", 12, "#000000", rot.c_str());
    }
    // colour bar with 5 ticks
    const double bx = kRight + 60;
    const int steps = 50;
    for (int k = 0; k < steps; ++k) {
        const double v = r.hi - (r.hi - r.lo) * (k + 0.5) / steps;
        const double y = kTop + (kBottom - kTop) * k / steps;
        w.rect(bx, y, 20, (kBottom - kTop) / steps + 0.5, shade(v).first);
    }
    for (int i = 0; i < kTicks; ++i) {
        const double f = static_cast<double>(i) / (kTicks - 1);
        const double y = kBottom - f * (kBottom - kTop);
        w.line(bx + 20, y, bx + 26, y);
        w.text(bx + 30, y + 4, tick_label(r.lo + f * (r.hi - r.lo)), "start");
    }
    return w.finish();
}

SvgDocument render_scatter(const ScatterChart& chart) {
    if (chart.points.empty()) throw DataError("scatter plot needs at least one point");
    double x_lo = INFINITY, x_hi = -INFINITY, y_lo = INFINITY, y_hi = -INFINITY;
    std::vector<std::string> groups;
    for (const auto& p : chart.points) {
        check_finite(p.x);
        check_finite(p.y);
        x_lo = std::min(x_lo, p.x);
        x_hi = std::max(x_hi, p.x);
        y_lo = std::min(y_lo, p.y);
        y_hi = std::max(y_hi, p.y);
        if (std::find(groups.begin(), groups.end(), p.group) == groups.end()) groups.push_back(p.group);
    }
    const Range xr = padded_range(x_lo, x_hi);
    const Range yr = padded_range(y_lo, y_hi);

    Writer w(chart.title);
    w.axes(xr, yr, "", "");
    const auto& colors = color_cycle();
    for (const auto& p : chart.points) {
        const auto g = static_cast<std::size_t>(std::find(groups.begin(), groups.end(), p.group) - groups.begin());
        w.raw("<circle cx=\"" + num(map(p.x, xr, kLeft, kRight)) + "\" cy=\"" + num(map(p.y, yr, kBottom, kTop)) +
              "\" r=\"2.5\" fill=\"" + colors[g % colors.size()] + "\" fill-opacity=\"0.8\"/>\n");
    }
    w.legend(groups);
    return w.finish();
}

void write_svg(const std::filesystem::path& path, const SvgDocument& doc) { write_text_file(path, doc.text); }

}  // namespace audit
