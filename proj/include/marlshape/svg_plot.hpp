#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace marlshape::svg {

struct Series {
  std::string label;
  std::string color;
  std::vector<double> mean;
  std::vector<double> band;  // half-width around the mean; may be empty
};

// Minimal line chart with optional shaded bands, one polyline per series.
void write_line_chart(std::ostream& out, const std::vector<Series>& series,
                      const std::string& title);

}  // namespace marlshape::svg
