#include "torusflow/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "torusflow/errors.hpp"

namespace torusflow {

namespace {

constexpr int kWidth = 720;
constexpr int kHeight = 460;
constexpr int kMarginL = 70, kMarginR = 130, kMarginT = 40, kMarginB = 50;

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c",
                         "#9467bd", "#ff7f0e", "#8c564b"};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

}  // namespace

void write_line_chart_svg(const std::string& path, const std::string& title,
                          const std::string& x_label,
                          const std::string& y_label,
                          const std::vector<SvgSeries>& series, bool log_y) {
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const auto& s : series) {
        for (auto [x, y] : s.points) {
            double yy = y;
            if (log_y) {
                if (!(y > 0.0)) continue;
                yy = std::log10(y);
            }
            if (!std::isfinite(x) || !std::isfinite(yy)) continue;
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, yy);
            ymax = std::max(ymax, yy);
        }
    }
    if (!(xmin < xmax)) {
        xmin = 0.0;
        xmax = 1.0;
    }
    if (!(ymin < ymax)) {
        ymin -= 0.5;
        ymax += 0.5;
    }
    const double px = (kWidth - kMarginL - kMarginR) / (xmax - xmin);
    const double py = (kHeight - kMarginT - kMarginB) / (ymax - ymin);
    auto sx = [&](double x) { return kMarginL + (x - xmin) * px; };
    auto sy = [&](double y) { return kHeight - kMarginB - (y - ymin) * py; };

    std::ofstream out(path);
    if (!out) throw IoError("cannot open SVG for writing: " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
        << "\" height=\"" << kHeight << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"16\">" << title
        << "</text>\n";

    // axes
    out << "<line x1=\"" << kMarginL << "\" y1=\"" << kHeight - kMarginB
        << "\" x2=\"" << kWidth - kMarginR << "\" y2=\"" << kHeight - kMarginB
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << kMarginL << "\" y1=\"" << kMarginT << "\" x2=\""
        << kMarginL << "\" y2=\"" << kHeight - kMarginB
        << "\" stroke=\"black\"/>\n";

    const int n_ticks = 5;
    for (int i = 0; i <= n_ticks; ++i) {
        const double x = xmin + (xmax - xmin) * i / n_ticks;
        const double y = ymin + (ymax - ymin) * i / n_ticks;
        out << "<line x1=\"" << sx(x) << "\" y1=\"" << kHeight - kMarginB
            << "\" x2=\"" << sx(x) << "\" y2=\"" << kHeight - kMarginB + 5
            << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << sx(x) << "\" y=\"" << kHeight - kMarginB + 18
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
            << "font-size=\"11\">" << fmt(x) << "</text>\n";
        out << "<line x1=\"" << kMarginL - 5 << "\" y1=\"" << sy(y)
            << "\" x2=\"" << kMarginL << "\" y2=\"" << sy(y)
            << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << kMarginL - 8 << "\" y=\"" << sy(y) + 4
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
            << "font-size=\"11\">"
            << (log_y ? "1e" + fmt(y) : fmt(y)) << "</text>\n";
    }
    out << "<text x=\"" << (kMarginL + kWidth - kMarginR) / 2 << "\" y=\""
        << kHeight - 12
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        << "font-size=\"13\">" << x_label << "</text>\n";
    out << "<text x=\"18\" y=\"" << (kMarginT + kHeight - kMarginB) / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        << "font-size=\"13\" transform=\"rotate(-90 18 "
        << (kMarginT + kHeight - kMarginB) / 2 << ")\">" << y_label
        << "</text>\n";

    int color_idx = 0;
    int legend_y = kMarginT + 10;
    for (const auto& s : series) {
        const char* color = kColors[color_idx % 6];
        out << "<polyline fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"1.5\" points=\"";
        for (auto [x, y] : s.points) {
            double yy = y;
            if (log_y) {
                if (!(y > 0.0)) continue;
                yy = std::log10(y);
            }
            if (!std::isfinite(x) || !std::isfinite(yy)) continue;
            out << fmt(sx(x)) << ',' << fmt(sy(yy)) << ' ';
        }
        out << "\"/>\n";
        out << "<line x1=\"" << kWidth - kMarginR + 10 << "\" y1=\""
            << legend_y << "\" x2=\"" << kWidth - kMarginR + 30 << "\" y2=\""
            << legend_y << "\" stroke=\"" << color
            << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << kWidth - kMarginR + 35 << "\" y=\""
            << legend_y + 4
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << s.name
            << "</text>\n";
        legend_y += 18;
        ++color_idx;
    }
    out << "</svg>\n";
    if (!out) throw IoError("SVG write failed: " + path);
}

}  // namespace torusflow
