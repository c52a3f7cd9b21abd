#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace audit {

/// SVG 1.1 text on a fixed 960 x 600 canvas.
struct SvgDocument {
    std::string text;
};

inline constexpr int kCanvasWidth = 960;
inline constexpr int kCanvasHeight = 600;

struct LineSeries {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

struct LineChart {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<LineSeries> series;
};

struct Heatmap {
    std::string title;
    std::vector<std::string> labels;  // rows and columns
    std::vector<std::vector<double>> values;
};

struct ScatterPoint {
    double x = 0.0;
    double y = 0.0;
    std::string group;
};

struct ScatterChart {
    std::string title;
    std::vector<ScatterPoint> points;
};

/// All renderers throw DataError on empty input and DimensionError on ragged
/// data. Output depends only on the input.
SvgDocument render_line_chart(const LineChart& chart);
/// Darker cells hold larger values; every cell carries its value as text.
SvgDocument render_heatmap(const Heatmap& map);
/// One colour per group, in order of first appearance.
SvgDocument render_scatter(const ScatterChart& chart);

void write_svg(const std::filesystem::path& path, const SvgDocument& doc);

/// Colour cycle shared by every chart.
const std::vector<std::string>& color_cycle();

}  // namespace audit
