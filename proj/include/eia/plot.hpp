#pragma once

#include <string>
#include <vector>

namespace eia {

struct LineSeries {
  std::vector<double> x;
  std::vector<double> y;
};

struct LinePlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<LineSeries> series;
};

// Minimal standalone SVG line chart with markers and axis ticks.
std::string render_svg(const LinePlot& plot);

}  // namespace eia
