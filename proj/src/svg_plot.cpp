#include "ee/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace ee {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

}  // namespace

std::string render_line_svg(const std::string& title, const std::string& x_label,
                            const std::string& y_label, const std::vector<PlotSeries>& series,
                            int width, int height) {
    const int ml = 60, mr = 20, mt = 40, mb = 50;
    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    bool first = true;
    for (const auto& s : series) {
        for (const auto& [x, y] : s.points) {
            if (first) {
                xmin = xmax = x;
                ymin = ymax = y;
                first = false;
            }
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    }
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) ymax = ymin + 1;

    auto sx = [&](double x) {
        return ml + (x - xmin) / (xmax - xmin) * (width - ml - mr);
    };
    auto sy = [&](double y) {
        return height - mb - (y - ymin) / (ymax - ymin) * (height - mt - mb);
    };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
           "\" height=\"" + std::to_string(height) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + std::to_string(width / 2) + "\" y=\"24\" text-anchor=\"middle\" "
           "font-size=\"16\" font-family=\"sans-serif\">" + title + "</text>\n";

    // Axes with min/max ticks.
    svg += "<line x1=\"" + fmt(ml) + "\" y1=\"" + fmt(height - mb) + "\" x2=\"" +
           fmt(width - mr) + "\" y2=\"" + fmt(height - mb) + "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + fmt(ml) + "\" y1=\"" + fmt(mt) + "\" x2=\"" + fmt(ml) + "\" y2=\"" +
           fmt(height - mb) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + fmt(ml) + "\" y=\"" + fmt(height - mb + 16) +
           "\" font-size=\"10\" font-family=\"sans-serif\">" + fmt(xmin) + "</text>\n";
    svg += "<text x=\"" + fmt(width - mr - 20) + "\" y=\"" + fmt(height - mb + 16) +
           "\" font-size=\"10\" font-family=\"sans-serif\">" + fmt(xmax) + "</text>\n";
    svg += "<text x=\"" + fmt(ml - 34) + "\" y=\"" + fmt(height - mb) +
           "\" font-size=\"10\" font-family=\"sans-serif\">" + fmt(ymin) + "</text>\n";
    svg += "<text x=\"" + fmt(ml - 34) + "\" y=\"" + fmt(mt + 10) +
           "\" font-size=\"10\" font-family=\"sans-serif\">" + fmt(ymax) + "</text>\n";
    svg += "<text x=\"" + std::to_string(width / 2) + "\" y=\"" + fmt(height - 12) +
           "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\">" + x_label +
           "</text>\n";
    svg += "<text x=\"16\" y=\"" + std::to_string(height / 2) +
           "\" font-size=\"12\" font-family=\"sans-serif\" transform=\"rotate(-90 16 " +
           std::to_string(height / 2) + ")\">" + y_label + "</text>\n";

    int legend_y = mt;
    for (const auto& s : series) {
        if (s.points.empty()) continue;
        std::string path = "M";
        for (std::size_t i = 0; i < s.points.size(); ++i) {
            if (i) path += " L";
            path += fmt(sx(s.points[i].first)) + " " + fmt(sy(s.points[i].second));
        }
        svg += "<path d=\"" + path + "\" fill=\"none\" stroke=\"" + s.color +
               "\" stroke-width=\"1.5\"/>\n";
        svg += "<text x=\"" + fmt(width - mr - 150) + "\" y=\"" + std::to_string(legend_y) +
               "\" font-size=\"11\" font-family=\"sans-serif\" fill=\"" + s.color + "\">" +
               s.label + "</text>\n";
        legend_y += 14;
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace ee
