#pragma once

#include <string>
#include <vector>

namespace zolearn::harness {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  double opacity = 1.0;
  bool in_legend = true;
};

// Minimal log-log line chart. Nonpositive points are skipped.
std::string render_loglog_svg(const std::string& title,
                              const std::string& y_label,
                              const std::vector<Series>& series);

}  // namespace zolearn::harness
