#include "loopforge/plot.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>

namespace loopforge {

namespace {

std::string fixed3(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

std::string escape(const std::string& text) {
    std::string out;
    for (char c : text) {
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

}  // namespace

std::string trajectory_svg(const std::vector<PlotSeries>& series, int width, int height) {
    constexpr double kMargin = 40.0;
    double min_x = std::numeric_limits<double>::infinity();
    double min_y = min_x;
    double max_x = -min_x;
    double max_y = -min_x;
    for (const auto& s : series) {
        for (const auto& e : s.trajectory) {
            min_x = std::min(min_x, e.pose.t.x());
            max_x = std::max(max_x, e.pose.t.x());
            min_y = std::min(min_y, e.pose.t.y());
            max_y = std::max(max_y, e.pose.t.y());
        }
    }
    if (!(min_x <= max_x)) {
        min_x = min_y = 0.0;
        max_x = max_y = 1.0;
    }
    const double span = std::max({max_x - min_x, max_y - min_y, 1e-9});
    const double scale = std::min(width - 2 * kMargin, height - 2 * kMargin) / span;
    auto px = [&](double x) { return kMargin + (x - min_x) * scale; };
    auto py = [&](double y) { return height - kMargin - (y - min_y) * scale; };

    std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
                      "\" height=\"" + std::to_string(height) + "\" viewBox=\"0 0 " + std::to_string(width) +
                      " " + std::to_string(height) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (const auto& s : series) {
        svg += "<polyline fill=\"none\" stroke=\"" + escape(s.color) + "\" stroke-width=\"1.5\" points=\"";
        bool first = true;
        for (const auto& e : s.trajectory) {
            if (!first) svg += ' ';
            svg += fixed3(px(e.pose.t.x())) + "," + fixed3(py(e.pose.t.y()));
            first = false;
        }
        svg += "\"><title>" + escape(s.label) + "</title></polyline>\n";
    }
    for (std::size_t i = 0; i < series.size(); ++i) {
        const double y = 20.0 + 18.0 * static_cast<double>(i);
        svg += "<line x1=\"10\" y1=\"" + fixed3(y - 4) + "\" x2=\"30\" y2=\"" + fixed3(y - 4) + "\" stroke=\"" +
               escape(series[i].color) + "\" stroke-width=\"3\"/>";
        svg += "<text x=\"36\" y=\"" + fixed3(y) + "\" font-family=\"sans-serif\" font-size=\"12\">" +
               escape(series[i].label) + "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace loopforge
