#include "mfsmd/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "mfsmd/errors.hpp"

namespace mfsmd {

namespace {

constexpr double kSize = 400.0;
constexpr double kMargin = 40.0;

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string header(const std::string& title) {
  const double full = kSize + 2 * kMargin;
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(full) + "\" height=\"" +
         num(full) + "\" viewBox=\"0 0 " + num(full) + ' ' + num(full) + "\">\n" +
         "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n" + "<text x=\"" +
         num(full / 2) + "\" y=\"" + num(kMargin / 2 + 5) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" +
         escape(title) + "</text>\n";
}

std::string frame(double x_min, double x_max, double y_min, double y_max) {
  std::string out = "<rect x=\"" + num(kMargin) + "\" y=\"" + num(kMargin) + "\" width=\"" +
                    num(kSize) + "\" height=\"" + num(kSize) +
                    "\" fill=\"none\" stroke=\"black\"/>\n";
  auto label = [&](double x, double y, const std::string& text, const char* anchor) {
    out += "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" text-anchor=\"" + anchor +
           "\" font-family=\"sans-serif\" font-size=\"10\">" + text + "</text>\n";
  };
  const double bottom = kMargin + kSize;
  label(kMargin, bottom + 14, num(x_min), "start");
  label(kMargin + kSize, bottom + 14, num(x_max), "end");
  label(kMargin - 4, bottom, num(y_min), "end");
  label(kMargin - 4, kMargin + 8, num(y_max), "end");
  return out;
}

// diverging map: -1 blue, 0 white, +1 red
std::string color(double v) {
  v = std::clamp(v, -1.0, 1.0);
  const int fade = static_cast<int>(std::lround(255.0 * (1.0 - std::abs(v))));
  char buf[8];
  if (v >= 0)
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", 255, fade, fade);
  else
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", fade, fade, 255);
  return buf;
}

}  // namespace

std::string scatter_svg(const Mat& points, const PlotBox& box, const std::string& title) {
  if (points.rows() != 2) throw InvalidArgument("scatter_svg: needs 2-d points");
  std::string out = header(title);
  const double sx = kSize / (box.x_max - box.x_min), sy = kSize / (box.y_max - box.y_min);
  for (Eigen::Index j = 0; j < points.cols(); ++j) {
    const double x = points(0, j), y = points(1, j);
    if (!(x >= box.x_min && x <= box.x_max && y >= box.y_min && y <= box.y_max)) continue;
    out += "<circle cx=\"" + num(kMargin + (x - box.x_min) * sx) + "\" cy=\"" +
           num(kMargin + (box.y_max - y) * sy) + "\" r=\"1.5\" fill=\"#1f4e9c\" fill-opacity=\"0.5\"/>\n";
  }
  out += frame(box.x_min, box.x_max, box.y_min, box.y_max);
  return out + "</svg>\n";
}

std::string heatmap_svg(const Mat& grid, const GridSpec& spec, const std::string& title) {
  if (grid.rows() < 1 || grid.cols() < 1) throw InvalidArgument("heatmap_svg: empty grid");
  std::string out = header(title);
  const double scale = std::max(grid.cwiseAbs().maxCoeff(), 1e-300);
  const double cw = kSize / static_cast<double>(grid.cols());
  const double ch = kSize / static_cast<double>(grid.rows());
  for (Eigen::Index j = 0; j < grid.rows(); ++j) {
    const double y = kMargin + kSize - static_cast<double>(j + 1) * ch;
    for (Eigen::Index i = 0; i < grid.cols(); ++i)
      out += "<rect x=\"" + num(kMargin + static_cast<double>(i) * cw) + "\" y=\"" + num(y) +
             "\" width=\"" + num(cw + 0.05) + "\" height=\"" + num(ch + 0.05) + "\" fill=\"" +
             color(grid(j, i) / scale) + "\"/>\n";
  }
  out += frame(spec.x1_min, spec.x1_max, spec.x2_min, spec.x2_max);
  return out + "</svg>\n";
}

}  // namespace mfsmd
