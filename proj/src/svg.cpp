#include <fairprompt/svg.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

namespace fairprompt::svg {

namespace {

constexpr double kPanelW = 420.0;
constexpr double kPanelH = 320.0;
constexpr double kMarginL = 56.0;
constexpr double kMarginR = 16.0;
constexpr double kMarginT = 40.0;
constexpr double kMarginB = 48.0;

struct Range {
  double lo = 0.0;
  double hi = 1.0;
};

Range data_range(const std::vector<Series>& series, bool x_axis) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& s : series) {
    const auto& v = x_axis ? s.x : s.y;
    for (double d : v) {
      if (!std::isfinite(d)) continue;
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
  }
  if (!std::isfinite(lo)) return {0.0, 1.0};
  if (lo == hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = 0.06 * (hi - lo);
  return {lo - pad, hi + pad};
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(4) << v;
  return os.str();
}

void render_panel(std::ostringstream& os, const Panel& panel, double x0) {
  const Range rx = data_range(panel.series, true);
  const Range ry = data_range(panel.series, false);
  const double plot_w = kPanelW - kMarginL - kMarginR;
  const double plot_h = kPanelH - kMarginT - kMarginB;
  auto px = [&](double v) { return x0 + kMarginL + (v - rx.lo) / (rx.hi - rx.lo) * plot_w; };
  auto py = [&](double v) { return kMarginT + plot_h - (v - ry.lo) / (ry.hi - ry.lo) * plot_h; };

  os << "<rect x='" << x0 + kMarginL << "' y='" << kMarginT << "' width='" << plot_w << "' height='"
     << plot_h << "' fill='none' stroke='#444' stroke-width='1'/>\n";
  os << "<text x='" << x0 + kPanelW / 2 << "' y='" << kMarginT - 14
     << "' text-anchor='middle' font-family='sans-serif' font-size='14'>" << panel.title << "</text>\n";
  os << "<text x='" << x0 + kPanelW / 2 << "' y='" << kPanelH - 10
     << "' text-anchor='middle' font-family='sans-serif' font-size='12'>" << panel.x_label << "</text>\n";
  os << "<text x='" << x0 + 14 << "' y='" << kMarginT + plot_h / 2
     << "' text-anchor='middle' font-family='sans-serif' font-size='12' transform='rotate(-90 " << x0 + 14
     << " " << kMarginT + plot_h / 2 << ")'>" << panel.y_label << "</text>\n";

  for (int t = 0; t <= 4; ++t) {
    const double fx = rx.lo + (rx.hi - rx.lo) * t / 4.0;
    const double fy = ry.lo + (ry.hi - ry.lo) * t / 4.0;
    os << "<line x1='" << px(fx) << "' y1='" << kMarginT + plot_h << "' x2='" << px(fx) << "' y2='"
       << kMarginT + plot_h + 4 << "' stroke='#444'/>\n";
    os << "<text x='" << px(fx) << "' y='" << kMarginT + plot_h + 18
       << "' text-anchor='middle' font-family='sans-serif' font-size='10'>" << fmt(fx) << "</text>\n";
    os << "<line x1='" << x0 + kMarginL - 4 << "' y1='" << py(fy) << "' x2='" << x0 + kMarginL << "' y2='"
       << py(fy) << "' stroke='#444'/>\n";
    os << "<text x='" << x0 + kMarginL - 7 << "' y='" << py(fy) + 3
       << "' text-anchor='end' font-family='sans-serif' font-size='10'>" << fmt(fy) << "</text>\n";
  }

  double legend_y = kMarginT + 12;
  for (const auto& s : panel.series) {
    os << "<polyline fill='none' stroke='" << s.color << "' stroke-width='2' points='";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.y[i])) continue;
      os << px(s.x[i]) << "," << py(s.y[i]) << " ";
    }
    os << "'/>\n";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.y[i])) continue;
      os << "<circle cx='" << px(s.x[i]) << "' cy='" << py(s.y[i]) << "' r='3' fill='" << s.color
         << "'/>\n";
    }
    os << "<line x1='" << x0 + kMarginL + 8 << "' y1='" << legend_y << "' x2='" << x0 + kMarginL + 28
       << "' y2='" << legend_y << "' stroke='" << s.color << "' stroke-width='2'/>\n";
    os << "<text x='" << x0 + kMarginL + 33 << "' y='" << legend_y + 4
       << "' font-family='sans-serif' font-size='11'>" << s.label << "</text>\n";
    legend_y += 16;
  }
}

}  // namespace

std::string render_panels(const std::vector<Panel>& panels, const std::string& title) {
  const double total_w = kPanelW * static_cast<double>(panels.size());
  std::ostringstream os;
  os << "<?xml version='1.0' encoding='UTF-8'?>\n";
  os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << total_w << "' height='" << kPanelH + 22
     << "' viewBox='0 0 " << total_w << " " << kPanelH + 22 << "'>\n";
  os << "<rect width='100%' height='100%' fill='white'/>\n";
  os << "<text x='" << total_w / 2 << "' y='16' text-anchor='middle' font-family='sans-serif' "
     << "font-size='15'>" << title << "</text>\n";
  for (std::size_t i = 0; i < panels.size(); ++i)
    render_panel(os, panels[i], kPanelW * static_cast<double>(i));
  os << "</svg>\n";
  return os.str();
}

}  // namespace fairprompt::svg
