#include "marlshape/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace marlshape::svg {

namespace {

constexpr double kWidth = 900, kHeight = 520;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;

struct Range {
  double lo = 0.0, hi = 1.0;
};

double map_x(std::size_t i, std::size_t n) {
  if (n <= 1) return kLeft;
  return kLeft + (kWidth - kLeft - kRight) * static_cast<double>(i) / static_cast<double>(n - 1);
}

double map_y(double v, const Range& r) {
  const double t = (v - r.lo) / (r.hi - r.lo);
  return kHeight - kBottom - (kHeight - kTop - kBottom) * t;
}

// Thin long series so the SVG stays small.
std::size_t stride_for(std::size_t n) {
  return std::max<std::size_t>(1, n / 2000);
}

}  // namespace

void write_line_chart(std::ostream& out, const std::vector<Series>& series,
                      const std::string& title) {
  if (series.empty()) throw std::invalid_argument("nothing to plot");
  Range range{0.0, 1.0};
  std::size_t n = 0;
  for (const auto& s : series) {
    n = std::max(n, s.mean.size());
    for (std::size_t i = 0; i < s.mean.size(); ++i) {
      const double band = s.band.empty() ? 0.0 : s.band[i];
      range.lo = std::min(range.lo, s.mean[i] - band);
      range.hi = std::max(range.hi, s.mean[i] + band);
    }
  }
  if (range.hi == range.lo) range.hi = range.lo + 1.0;

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
      << title << "</text>\n";
  out << "<line x1=\"" << kLeft << "\" y1=\"" << kHeight - kBottom << "\" x2=\""
      << kWidth - kRight << "\" y2=\"" << kHeight - kBottom << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
      << kHeight - kBottom << "\" stroke=\"black\"/>\n";
  for (int tick = 0; tick <= 4; ++tick) {
    const double v = range.lo + (range.hi - range.lo) * tick / 4.0;
    const double y = map_y(v, range);
    out << "<text x=\"" << kLeft - 8 << "\" y=\"" << y + 4
        << "\" text-anchor=\"end\" font-size=\"11\">" << v << "</text>\n";
    out << "<line x1=\"" << kLeft << "\" y1=\"" << y << "\" x2=\"" << kWidth - kRight
        << "\" y2=\"" << y << "\" stroke=\"#dddddd\"/>\n";
  }

  for (const auto& s : series) {
    const std::size_t len = s.mean.size();
    if (len == 0) continue;
    const std::size_t stride = stride_for(len);
    if (!s.band.empty()) {
      out << "<path fill=\"" << s.color << "\" fill-opacity=\"0.15\" stroke=\"none\" d=\"";
      bool first = true;
      for (std::size_t i = 0; i < len; i += stride) {
        out << (first ? "M" : "L") << map_x(i, len) << " "
            << map_y(s.mean[i] + s.band[i], range) << " ";
        first = false;
      }
      for (std::size_t i = len; i-- > 0;) {
        if (i % stride != 0 && i != len - 1) continue;
        out << "L" << map_x(i, len) << " " << map_y(s.mean[i] - s.band[i], range) << " ";
      }
      out << "Z\"/>\n";
    }
    out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < len; i += stride)
      out << map_x(i, len) << "," << map_y(s.mean[i], range) << " ";
    out << "\"/>\n";
  }

  double legend_y = kTop + 6;
  for (const auto& s : series) {
    out << "<rect x=\"" << kWidth - kRight - 190 << "\" y=\"" << legend_y - 10
        << "\" width=\"12\" height=\"12\" fill=\"" << s.color << "\"/>\n";
    out << "<text x=\"" << kWidth - kRight - 172 << "\" y=\"" << legend_y
        << "\" font-size=\"12\">" << s.label << "</text>\n";
    legend_y += 18;
  }
  out << "</svg>\n";
}

}  // namespace marlshape::svg
