#pragma once

#include <string>
#include <vector>

namespace foldsense {

struct ChartSeries {
    std::string label;
    std::vector<double> x, y;
};

struct ChartSpec {
    std::string title, x_label, y_label;
    std::vector<ChartSeries> series;
    int width = 760;
    int height = 480;
};

/// Minimal deterministic line-chart writer; the CSVs are the data contract,
/// this is a convenience view.
std::string render_line_chart(const ChartSpec& spec);
void write_line_chart(const std::string& path, const ChartSpec& spec);

}  // namespace foldsense
