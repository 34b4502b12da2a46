#pragma once

#include <string>
#include <vector>

namespace ee {

// Minimal line-chart renderer for the evaluate subcommand's plot output.
struct PlotSeries {
    std::string label;
    std::string color = "#1f6fb2";
    std::vector<std::pair<double, double>> points;
};

std::string render_line_svg(const std::string& title, const std::string& x_label,
                            const std::string& y_label, const std::vector<PlotSeries>& series,
                            int width = 640, int height = 480);

}  // namespace ee
