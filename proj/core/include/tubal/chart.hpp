#pragma once

#include <string>
#include <vector>

#include "tubal/errors.hpp"

namespace tubal::io {

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

struct ChartSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    bool log_y = false;
};

/// Self-contained SVG 1.1 line chart. The value-to-pixel mapping is recorded
/// as data-* attributes on the root element so plotted values can be read
/// back from the polyline coordinates.
std::string chart_svg_string(const ChartSpec& spec, const std::vector<Series>& series);

void emit_chart_svg(const std::string& path, const ChartSpec& spec,
                    const std::vector<Series>& series);

/// Inverse of the writer for one named series: reconstructs (x, y) values
/// from the polyline points and the recorded mapping.
Series parse_series_from_svg(const std::string& svg_text, const std::string& name);

}  // namespace tubal::io
