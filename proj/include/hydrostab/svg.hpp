#pragma once

/// Dependency-free SVG line plots for norm-vs-time and Phi-vs-s curves.
/// Deterministic text output, diffable in CI.

#include <filesystem>
#include <string>
#include <vector>

namespace hydrostab {

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    std::string color = "#1f6fb2";
    bool markers = false;
};

struct PlotOptions {
    std::string title;
    std::string xlabel;
    std::string ylabel;
    bool log_y = false;
    bool log_x = false;
    int width = 720;
    int height = 480;
};

void write_line_plot(const std::filesystem::path& path, const PlotOptions& opts,
                     const std::vector<PlotSeries>& series);

}  // namespace hydrostab
