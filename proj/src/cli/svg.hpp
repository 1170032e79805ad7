#pragma once

// Minimal SVG 1.1 line plots: axes, ticks, polylines and a legend.

#include <string>
#include <vector>

namespace ehap::cli {

struct PlotSeries {
  std::string label;
  std::string color;  // any SVG colour
  std::vector<double> x, y;
  bool dashed = false;
};

struct LinePlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
  int width = 800;
  int height = 450;
};

std::string render_svg(const LinePlot& plot);

// Evenly strided subset of at most max_points indices, always keeping the last.
std::vector<std::size_t> decimate(std::size_t n, std::size_t max_points);

}  // namespace ehap::cli
