#include "tubal/chart.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace tubal::io {

namespace {

constexpr double kWidth = 860.0, kHeight = 520.0;
constexpr double kLeft = 70.0, kRight = 830.0, kTop = 50.0, kBottom = 460.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt(double v, const char* spec = "%.3f") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char ch : s) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += ch;
        }
    }
    return out;
}

struct Axis {
    double lo = 0.0, hi = 1.0;
    bool log = false;

    double to_unit(double v) const {
        const double a = log ? std::log10(lo) : lo;
        const double b = log ? std::log10(hi) : hi;
        const double t = log ? std::log10(v) : v;
        return b > a ? (t - a) / (b - a) : 0.5;
    }
};

Axis fit_axis(const std::vector<Series>& series, bool take_x, bool log_scale,
              const char* axis_name) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& s : series) {
        const auto& vals = take_x ? s.x : s.y;
        for (double v : vals) {
            if (!std::isfinite(v)) throw NumericalFailure("chart: non-finite data value");
            if (log_scale && v <= 0.0) {
                throw NonPositiveOnLogAxis(std::string("chart: non-positive value on log ") +
                                           axis_name + " axis");
            }
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    if (!(lo <= hi)) {
        lo = log_scale ? 0.1 : 0.0;
        hi = 1.0;
    }
    if (lo == hi) {
        if (log_scale) {
            lo /= 2.0;
            hi *= 2.0;
        } else {
            lo -= 0.5;
            hi += 0.5;
        }
    }
    Axis a;
    a.lo = lo;
    a.hi = hi;
    a.log = log_scale;
    return a;
}

std::vector<double> axis_ticks(const Axis& a) {
    std::vector<double> ticks;
    if (a.log) {
        const int d0 = static_cast<int>(std::ceil(std::log10(a.lo) - 1e-9));
        const int d1 = static_cast<int>(std::floor(std::log10(a.hi) + 1e-9));
        for (int d = d0; d <= d1; ++d) ticks.push_back(std::pow(10.0, d));
        if (ticks.empty()) ticks = {a.lo, a.hi};
    } else {
        for (int i = 0; i <= 5; ++i) ticks.push_back(a.lo + (a.hi - a.lo) * i / 5.0);
    }
    return ticks;
}

}  // namespace

std::string chart_svg_string(const ChartSpec& spec, const std::vector<Series>& series) {
    const Axis ax = fit_axis(series, true, spec.log_x, "x");
    const Axis ay = fit_axis(series, false, spec.log_y, "y");

    auto px = [&](double v) { return kLeft + ax.to_unit(v) * (kRight - kLeft); };
    auto py = [&](double v) { return kBottom - ay.to_unit(v) * (kBottom - kTop); };

    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << kWidth
        << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight
        << "\" data-xmin=\"" << fmt17(ax.lo) << "\""
        << " data-xmax=\"" << fmt17(ax.hi) << "\""
        << " data-ymin=\"" << fmt17(ay.lo) << "\""
        << " data-ymax=\"" << fmt17(ay.hi) << "\""
        << " data-logx=\"" << (spec.log_x ? 1 : 0) << "\" data-logy=\"" << (spec.log_y ? 1 : 0)
        << "\" data-left=\"" << kLeft << "\" data-right=\"" << kRight << "\" data-top=\""
        << kTop << "\" data-bottom=\"" << kBottom << "\">\n";
    out << "  <rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" fill=\"white\"/>\n";
    out << "  <text x=\"" << (kWidth / 2) << "\" y=\"28\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"16\">" << xml_escape(spec.title)
        << "</text>\n";

    // gridlines + ticks
    for (double t : axis_ticks(ax)) {
        const double x = px(t);
        out << "  <line x1=\"" << fmt(x) << "\" y1=\"" << kTop << "\" x2=\"" << fmt(x)
            << "\" y2=\"" << kBottom << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        out << "  <text x=\"" << fmt(x) << "\" y=\"" << (kBottom + 18)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
            << fmt(t, "%.4g") << "</text>\n";
    }
    for (double t : axis_ticks(ay)) {
        const double y = py(t);
        out << "  <line x1=\"" << kLeft << "\" y1=\"" << fmt(y) << "\" x2=\"" << kRight
            << "\" y2=\"" << fmt(y) << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        out << "  <text x=\"" << (kLeft - 6) << "\" y=\"" << fmt(y + 4)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
            << fmt(t, "%.4g") << "</text>\n";
    }
    // axes
    out << "  <line x1=\"" << kLeft << "\" y1=\"" << kBottom << "\" x2=\"" << kRight
        << "\" y2=\"" << kBottom << "\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
    out << "  <line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft
        << "\" y2=\"" << kBottom << "\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
    out << "  <text x=\"" << ((kLeft + kRight) / 2) << "\" y=\"" << (kHeight - 12)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
        << xml_escape(spec.x_label) << "</text>\n";
    out << "  <text x=\"18\" y=\"" << ((kTop + kBottom) / 2)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
        << "transform=\"rotate(-90 18 " << ((kTop + kBottom) / 2) << ")\">"
        << xml_escape(spec.y_label) << "</text>\n";

    for (size_t s = 0; s < series.size(); ++s) {
        const char* color = kPalette[s % (sizeof(kPalette) / sizeof(kPalette[0]))];
        out << "  <polyline data-series=\"" << xml_escape(series[s].name)
            << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.8\" points=\"";
        for (size_t i = 0; i < series[s].x.size(); ++i) {
            if (i) out << ' ';
            out << fmt(px(series[s].x[i])) << ',' << fmt(py(series[s].y[i]));
        }
        out << "\"/>\n";
        const double ly = kTop + 16.0 + 18.0 * static_cast<double>(s);
        out << "  <line x1=\"" << (kRight - 150) << "\" y1=\"" << fmt(ly - 4) << "\" x2=\""
            << (kRight - 126) << "\" y2=\"" << fmt(ly - 4) << "\" stroke=\"" << color
            << "\" stroke-width=\"3\"/>\n";
        out << "  <text x=\"" << (kRight - 120) << "\" y=\"" << fmt(ly)
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << xml_escape(series[s].name)
            << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

void emit_chart_svg(const std::string& path, const ChartSpec& spec,
                    const std::vector<Series>& series) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open '" + path + "' for writing");
    out << chart_svg_string(spec, series);
    if (!out) throw FormatError("write failed for '" + path + "'");
}

namespace {

std::string attr_value(const std::string& text, const std::string& attr, size_t from = 0) {
    const std::string needle = attr + "=\"";
    const size_t at = text.find(needle, from);
    if (at == std::string::npos) throw FormatError("SVG missing attribute " + attr);
    const size_t end = text.find('"', at + needle.size());
    return text.substr(at + needle.size(), end - at - needle.size());
}

}  // namespace

Series parse_series_from_svg(const std::string& svg_text, const std::string& name) {
    const double xmin = std::stod(attr_value(svg_text, "data-xmin"));
    const double xmax = std::stod(attr_value(svg_text, "data-xmax"));
    const double ymin = std::stod(attr_value(svg_text, "data-ymin"));
    const double ymax = std::stod(attr_value(svg_text, "data-ymax"));
    const bool logx = attr_value(svg_text, "data-logx") == "1";
    const bool logy = attr_value(svg_text, "data-logy") == "1";
    const double left = std::stod(attr_value(svg_text, "data-left"));
    const double right = std::stod(attr_value(svg_text, "data-right"));
    const double top = std::stod(attr_value(svg_text, "data-top"));
    const double bottom = std::stod(attr_value(svg_text, "data-bottom"));

    const std::string marker = "data-series=\"" + name + "\"";
    const size_t at = svg_text.find(marker);
    if (at == std::string::npos) throw FormatError("SVG has no series named '" + name + "'");
    const std::string points = attr_value(svg_text, "points", at);

    auto unmap = [](double unit, double lo, double hi, bool log) {
        const double a = log ? std::log10(lo) : lo;
        const double b = log ? std::log10(hi) : hi;
        const double v = a + unit * (b - a);
        return log ? std::pow(10.0, v) : v;
    };

    Series s;
    s.name = name;
    std::istringstream in(points);
    std::string pair;
    while (in >> pair) {
        const size_t comma = pair.find(',');
        if (comma == std::string::npos) throw FormatError("bad polyline point '" + pair + "'");
        const double px = std::stod(pair.substr(0, comma));
        const double py = std::stod(pair.substr(comma + 1));
        s.x.push_back(unmap((px - left) / (right - left), xmin, xmax, logx));
        s.y.push_back(unmap((bottom - py) / (bottom - top), ymin, ymax, logy));
    }
    return s;
}

}  // namespace tubal::io
