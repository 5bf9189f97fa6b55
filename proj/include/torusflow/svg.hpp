#ifndef TORUSFLOW_SVG_HPP
#define TORUSFLOW_SVG_HPP

#include <string>
#include <utility>
#include <vector>

namespace torusflow {

struct SvgSeries {
    std::string name;
    std::vector<std::pair<double, double>> points;
};

/// Self-contained static line chart; log-scale y plots log10 of the data.
/// No timestamps or external references, so output is reproducible.
void write_line_chart_svg(const std::string& path, const std::string& title,
                          const std::string& x_label,
                          const std::string& y_label,
                          const std::vector<SvgSeries>& series,
                          bool log_y = false);

}  // namespace torusflow

#endif
