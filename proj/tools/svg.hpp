#pragma once

// Minimal SVG line/band/ellipse plots for the predict and locus verbs.

#include <string>
#include <vector>

namespace shockgp::svg {

struct Series {
  std::string label;
  std::string color;
  std::vector<double> x, y, lo, hi;  // lo/hi empty -> no band
};

struct EllipseShape {
  double cx, cy, rx, ry, angle_rad;
  std::string color;
};

struct Panel {
  std::string title, xlabel, ylabel;
  std::vector<Series> series;
  std::vector<EllipseShape> ellipses;
};

/// Panels laid out in a row-major grid with `cols` columns.
std::string render(const std::vector<Panel>& panels, int cols);

}  // namespace shockgp::svg
