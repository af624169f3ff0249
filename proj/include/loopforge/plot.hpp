#pragma once

#include <string>
#include <vector>

#include "loopforge/pose_graph.hpp"

namespace loopforge {

struct PlotSeries {
    std::string label;
    std::string color;
    Trajectory trajectory;
};

/// Top-down (x, y) overlay of the series as an SVG document. Output depends
/// only on the inputs, with coordinates printed to 3 decimals.
std::string trajectory_svg(const std::vector<PlotSeries>& series, int width = 800, int height = 800);

}  // namespace loopforge
