#pragma once

#include <string>
#include <vector>

namespace rain::svg {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct BarGroup {
  std::string label;              // x-axis group label
  std::vector<double> values;     // one bar per series
};

// Deterministic output: fixed canvas, fixed color table, fixed-precision
// coordinates, no timestamps.
void write_line_chart(const std::string& path, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<Series>& series);

void write_bar_chart(const std::string& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<std::string>& series_labels,
                     const std::vector<BarGroup>& groups);

}  // namespace rain::svg
