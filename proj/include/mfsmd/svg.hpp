#pragma once

#include <string>

#include "mfsmd/metrics.hpp"
#include "mfsmd/types.hpp"

namespace mfsmd {

struct PlotBox {
  double x_min = -2.0, x_max = 2.0;
  double y_min = -2.0, y_max = 2.0;
};

/// Scatter of the columns of a 2 x n matrix; points outside the box are dropped.
std::string scatter_svg(const Mat& points, const PlotBox& box, const std::string& title);

/// Diverging heatmap of a decision_grid result, blue < 0 < red, scaled by max |value|.
std::string heatmap_svg(const Mat& grid, const GridSpec& spec, const std::string& title);

}  // namespace mfsmd
