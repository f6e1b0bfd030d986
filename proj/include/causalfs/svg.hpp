#pragma once

#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace causalfs {

struct ChartSeries {
    std::string label;
    std::string color;  // empty picks from a fixed palette
    bool dashed = false;
    std::vector<std::pair<double, double>> points;
};

/// Small deterministic line chart. reference draws a horizontal guide line
/// when finite.
std::string render_line_chart(const std::string& title, const std::string& x_label,
                              const std::string& y_label,
                              const std::vector<ChartSeries>& series,
                              double reference = std::numeric_limits<double>::quiet_NaN());

}  // namespace causalfs
