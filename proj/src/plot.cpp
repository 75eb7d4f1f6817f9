#include "eia/plot.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

namespace eia {
namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 55.0;

const char* const kColors[] = {"#1f77b4", "#2ca02c", "#d62728", "#ff7f0e"};

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

// Round tick spacing: 1, 2 or 5 times a power of ten.
double tick_step(double span) {
  if (!(span > 0.0)) return 1.0;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double norm = raw / mag;
  return (norm < 1.5 ? 1.0 : norm < 3.5 ? 2.0 : norm < 7.5 ? 5.0 : 10.0) * mag;
}

}  // namespace

std::string render_svg(const LinePlot& plot) {
  double x_lo = std::numeric_limits<double>::infinity();
  double x_hi = -x_lo;
  double y_lo = x_lo;
  double y_hi = -x_lo;
  for (const auto& s : plot.series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x_lo = std::min(x_lo, s.x[i]);
      x_hi = std::max(x_hi, s.x[i]);
      y_lo = std::min(y_lo, s.y[i]);
      y_hi = std::max(y_hi, s.y[i]);
    }
  }
  if (!std::isfinite(x_lo)) {
    x_lo = 0.0;
    x_hi = 1.0;
    y_lo = 0.0;
    y_hi = 1.0;
  }
  if (x_hi == x_lo) x_hi = x_lo + 1.0;
  if (y_hi == y_lo) y_hi = y_lo + 1.0;
  const double pad = 0.05 * (y_hi - y_lo);
  y_lo -= pad;
  y_hi += pad;

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto sx = [&](double x) { return kLeft + (x - x_lo) / (x_hi - x_lo) * plot_w; };
  auto sy = [&](double y) { return kTop + (y_hi - y) / (y_hi - y_lo) * plot_h; };

  std::ostringstream out;
  out << std::setprecision(6);
  out << R"(<svg xmlns="http://www.w3.org/2000/svg" width=")" << kWidth << R"(" height=")"
      << kHeight << R"(" font-family="sans-serif" font-size="12">)" << '\n';
  out << R"(<rect width="100%" height="100%" fill="white"/>)" << '\n';
  out << R"(<text x=")" << kWidth / 2 << R"(" y="22" text-anchor="middle" font-size="15">)"
      << escape(plot.title) << "</text>\n";
  out << R"(<rect x=")" << kLeft << R"(" y=")" << kTop << R"(" width=")" << plot_w
      << R"(" height=")" << plot_h << R"(" fill="none" stroke="black"/>)" << '\n';

  const double xs = tick_step(x_hi - x_lo);
  for (double t = std::ceil(x_lo / xs) * xs; t <= x_hi + 1e-9 * xs; t += xs) {
    out << R"(<line x1=")" << sx(t) << R"(" y1=")" << kTop + plot_h << R"(" x2=")" << sx(t)
        << R"(" y2=")" << kTop + plot_h + 5 << R"(" stroke="black"/>)";
    out << R"(<text x=")" << sx(t) << R"(" y=")" << kTop + plot_h + 19
        << R"(" text-anchor="middle">)" << t << "</text>\n";
  }
  const double ys = tick_step(y_hi - y_lo);
  for (double t = std::ceil(y_lo / ys) * ys; t <= y_hi + 1e-9 * ys; t += ys) {
    out << R"(<line x1=")" << kLeft - 5 << R"(" y1=")" << sy(t) << R"(" x2=")" << kLeft
        << R"(" y2=")" << sy(t) << R"(" stroke="black"/>)";
    out << R"(<text x=")" << kLeft - 8 << R"(" y=")" << sy(t) + 4
        << R"(" text-anchor="end">)" << t << "</text>\n";
  }
  out << R"(<text x=")" << kLeft + plot_w / 2 << R"(" y=")" << kHeight - 12
      << R"(" text-anchor="middle">)" << escape(plot.x_label) << "</text>\n";
  out << "<text transform=\"translate(16 " << kTop + plot_h / 2
      << R"x() rotate(-90)" text-anchor="middle">)x" << escape(plot.y_label) << "</text>\n";

  for (std::size_t k = 0; k < plot.series.size(); ++k) {
    const auto& s = plot.series[k];
    const char* color = kColors[k % std::size(kColors)];
    out << R"(<polyline fill="none" stroke=")" << color << R"(" stroke-width="1.5" points=")";
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (std::isfinite(s.y[i])) out << sx(s.x[i]) << ',' << sy(s.y[i]) << ' ';
    }
    out << "\"/>\n";
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.y[i])) continue;
      out << R"(<circle cx=")" << sx(s.x[i]) << R"(" cy=")" << sy(s.y[i])
          << R"(" r="3" fill=")" << color << "\"/>\n";
    }
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace eia
