#include "fairpsy/report.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <sstream>

namespace fairpsy {

namespace {

constexpr double kWidth = 640, kHeight = 400;
constexpr double kLeft = 60, kRight = 170, kTop = 40, kBottom = 50;
constexpr std::array<const char*, 4> kColours = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string line_chart_svg(std::string_view title, std::string_view x_label, const std::vector<double>& x,
                           const std::vector<ChartSeries>& series, std::optional<double> marker) {
  for (const auto& s : series)
    if (s.values.size() != x.size()) throw DataError("chart series '" + s.label + "' does not match the x values");

  double x_lo = 0.0, x_hi = 1.0, y_lo = 0.0, y_hi = 1.0;
  for (double v : x) x_lo = std::min(x_lo, v), x_hi = std::max(x_hi, v);
  for (const auto& s : series)
    for (const auto& v : s.values)
      if (v && std::isfinite(*v)) y_lo = std::min(y_lo, *v), y_hi = std::max(y_hi, *v);

  const double plot_w = kWidth - kLeft - kRight, plot_h = kHeight - kTop - kBottom;
  auto px = [&](double v) { return kLeft + (v - x_lo) / (x_hi - x_lo) * plot_w; };
  auto py = [&](double v) { return kTop + (y_hi - v) / (y_hi - y_lo) * plot_h; };

  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << num(kWidth / 2) << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" "
    << "font-size=\"15\">" << escape(title) << "</text>\n";

  // Axes with five ticks each.
  o << "<g stroke=\"black\" stroke-width=\"1\">\n"
    << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kTop + plot_h) << "\" x2=\"" << num(kLeft + plot_w)
    << "\" y2=\"" << num(kTop + plot_h) << "\"/>\n"
    << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(kLeft) << "\" y2=\""
    << num(kTop + plot_h) << "\"/>\n"
    << "</g>\n<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = x_lo + (x_hi - x_lo) * i / 5.0, yv = y_lo + (y_hi - y_lo) * i / 5.0;
    o << "<text x=\"" << num(px(xv)) << "\" y=\"" << num(kTop + plot_h + 16) << "\" text-anchor=\"middle\">"
      << num(xv) << "</text>\n"
      << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(py(yv) + 4) << "\" text-anchor=\"end\">" << num(yv)
      << "</text>\n"
      << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(py(yv)) << "\" x2=\"" << num(kLeft + plot_w)
      << "\" y2=\"" << num(py(yv)) << "\" stroke=\"#dddddd\"/>\n";
  }
  o << "<text x=\"" << num(kLeft + plot_w / 2) << "\" y=\"" << num(kHeight - 12)
    << "\" text-anchor=\"middle\" font-size=\"13\">" << escape(x_label) << "</text>\n</g>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* colour = kColours[s % kColours.size()];
    std::string points;
    auto flush = [&] {
      if (!points.empty())
        o << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"2\" points=\"" << points
          << "\"/>\n";
      points.clear();
    };
    for (std::size_t i = 0; i < x.size(); ++i) {
      const Metric& v = series[s].values[i];
      if (!v || !std::isfinite(*v)) {
        flush();
        continue;
      }
      if (!points.empty()) points += ' ';
      points += num(px(x[i])) + ',' + num(py(*v));
    }
    flush();
    const double ly = kTop + 10 + 20.0 * static_cast<double>(s);
    o << "<line x1=\"" << num(kLeft + plot_w + 15) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(kLeft + plot_w + 40)
      << "\" y2=\"" << num(ly) << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>\n"
      << "<text x=\"" << num(kLeft + plot_w + 45) << "\" y=\"" << num(ly + 4)
      << "\" font-family=\"sans-serif\" font-size=\"11\">" << escape(series[s].label) << "</text>\n";
  }

  if (marker)
    o << "<line x1=\"" << num(px(*marker)) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(px(*marker))
      << "\" y2=\"" << num(kTop + plot_h) << "\" stroke=\"black\" stroke-width=\"1.5\" stroke-dasharray=\"2,4\"/>\n";
  o << "</svg>\n";
  return o.str();
}

}  // namespace fairpsy
