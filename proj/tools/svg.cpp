#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "cli.hpp"

namespace irbfn::cli {
namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 600.0;
constexpr double kMargin = 60.0;
constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), pattern, a, b, c, d);
  return buf;
}

// 1, 2 or 5 times a power of ten, giving roughly five ticks over `span`.
double tick_step(double span) {
  const double raw = span / 5.0;
  const double base = std::pow(10.0, std::floor(std::log10(raw)));
  for (double mult : {1.0, 2.0, 5.0}) {
    if (mult * base >= raw) return mult * base;
  }
  return 10.0 * base;
}

}  // namespace

std::string render_svg(std::span<const std::vector<TrajectorySample>> trajectories) {
  double x_lo = 0.0, x_hi = 1.0, y_lo = -0.5, y_hi = 0.5;
  for (const auto& traj : trajectories) {
    for (const auto& s : traj) {
      x_lo = std::min(x_lo, s.pose.x);
      x_hi = std::max(x_hi, s.pose.x);
      y_lo = std::min(y_lo, s.pose.y);
      y_hi = std::max(y_hi, s.pose.y);
    }
  }
  // Equal scale on both axes so curvature reads correctly.
  const double scale = std::min((kWidth - 2 * kMargin) / (x_hi - x_lo),
                                (kHeight - 2 * kMargin) / (y_hi - y_lo));
  auto px = [&](double x) { return kMargin + (x - x_lo) * scale; };
  auto py = [&](double y) { return kHeight - kMargin - (y - y_lo) * scale; };

  std::string svg = fmt(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" "
      "viewBox=\"0 0 %.0f %.0f\">\n",
      kWidth, kHeight, kWidth, kHeight);
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<g font-family=\"sans-serif\" font-size=\"12\" fill=\"black\">\n";
  const double x_axis_y = kHeight - kMargin + 10.0;
  svg += fmt("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>\n",
             px(x_lo), x_axis_y, px(x_hi), x_axis_y);
  svg += fmt("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>\n",
             kMargin - 10.0, py(y_lo), kMargin - 10.0, py(y_hi));
  const double xt = tick_step(x_hi - x_lo);
  for (double v = std::ceil(x_lo / xt) * xt; v <= x_hi + 1e-9; v += xt) {
    svg += fmt("<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"middle\">%g</text>\n", px(v),
               x_axis_y + 16.0, std::abs(v) < 1e-12 ? 0.0 : v);
  }
  const double yt = tick_step(y_hi - y_lo);
  for (double v = std::ceil(y_lo / yt) * yt; v <= y_hi + 1e-9; v += yt) {
    svg += fmt("<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"end\">%g</text>\n", kMargin - 14.0,
               py(v) + 4.0, std::abs(v) < 1e-12 ? 0.0 : v);
  }
  svg += fmt("<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"middle\">x (m)</text>\n", kWidth / 2.0,
             kHeight - 12.0);
  svg += fmt("<text x=\"16\" y=\"%.2f\" text-anchor=\"middle\" transform=\"rotate(-90 16 %.2f)\">"
             "y (m)</text>\n",
             kHeight / 2.0, kHeight / 2.0);
  svg += "</g>\n";

  std::size_t index = 0;
  for (const auto& traj : trajectories) {
    svg += "<polyline fill=\"none\" stroke-width=\"2\" stroke=\"";
    svg += kPalette[index++ % std::size(kPalette)];
    svg += "\" points=\"";
    for (const auto& s : traj) svg += fmt("%.2f,%.2f ", px(s.pose.x), py(s.pose.y));
    svg += "\"/>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace irbfn::cli
