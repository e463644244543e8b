#pragma once

// Minimal SVG plots for the output tree: line plots and heatmaps with overlays.

#include <filesystem>
#include <string>
#include <vector>

namespace dopplerline::svg {

struct Series {
    std::string label;
    std::string color = "#1f77b4";
    std::vector<double> x;
    std::vector<double> y;
    bool markers = false;  ///< draw points instead of a polyline
};

struct LinePlot {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Series> series;
};

struct Heatmap {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<double> x_axis;
    std::vector<double> y_axis;
    /// Row-major over (y, x): values[iy * x_axis.size() + ix].
    std::vector<double> values;
    std::vector<Series> overlays;
};

std::string render_line_plot(const LinePlot& p, int width = 720, int height = 440);
std::string render_heatmap(const Heatmap& h, int width = 720, int height = 440);

/// Throws IoError.
void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace dopplerline::svg
