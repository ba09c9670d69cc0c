#pragma once

#include <string>
#include <vector>

namespace fairprompt::svg {

struct Series {
  std::string label;
  std::string color;
  std::vector<double> x;
  std::vector<double> y;
};

struct Panel {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
};

/// Self-contained two-panel line chart (inline styling, no external assets).
std::string render_panels(const std::vector<Panel>& panels, const std::string& title);

}  // namespace fairprompt::svg
