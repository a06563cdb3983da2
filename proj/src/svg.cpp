#include "rain/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "rain/error.hpp"

namespace rain::svg {

namespace {

constexpr int kWidth = 720;
constexpr int kHeight = 440;
constexpr int kMarginLeft = 70;
constexpr int kMarginRight = 160;
constexpr int kMarginTop = 40;
constexpr int kMarginBottom = 55;

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                         "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string fmt_tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

struct Frame {
  double x_min, x_max, y_min, y_max;
  double px(double x) const {
    const double span = x_max > x_min ? x_max - x_min : 1.0;
    return kMarginLeft + (x - x_min) / span * (kWidth - kMarginLeft - kMarginRight);
  }
  double py(double y) const {
    const double span = y_max > y_min ? y_max - y_min : 1.0;
    return kHeight - kMarginBottom - (y - y_min) / span * (kHeight - kMarginTop - kMarginBottom);
  }
};

void open_svg(std::ofstream& out, const std::string& path) {
  out.open(path);
  if (!out) throw_error(ErrorCode::IoError, "cannot write " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
  out << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
}

void draw_axes(std::ofstream& out, const Frame& f, const std::string& title,
               const std::string& x_label, const std::string& y_label) {
  out << "<text x=\"" << kWidth / 2 << "\" y=\"22\" font-family=\"sans-serif\" font-size=\"15\""
      << " text-anchor=\"middle\">" << title << "</text>\n";
  const double x0 = kMarginLeft, x1 = kWidth - kMarginRight;
  const double y0 = kHeight - kMarginBottom, y1 = kMarginTop;
  out << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x1 << "\" y2=\"" << y0
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x0 << "\" y2=\"" << y1
      << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = f.x_min + (f.x_max - f.x_min) * i / 4.0;
    const double yv = f.y_min + (f.y_max - f.y_min) * i / 4.0;
    out << "<text x=\"" << fmt(f.px(xv)) << "\" y=\"" << y0 + 18
        << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">"
        << fmt_tick(xv) << "</text>\n";
    out << "<text x=\"" << x0 - 8 << "\" y=\"" << fmt(f.py(yv) + 4)
        << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">" << fmt_tick(yv)
        << "</text>\n";
  }
  out << "<text x=\"" << (x0 + x1) / 2 << "\" y=\"" << kHeight - 14
      << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">" << x_label
      << "</text>\n";
  out << "<text x=\"18\" y=\"" << (y0 + y1) / 2
      << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\""
      << " transform=\"rotate(-90 18 " << (y0 + y1) / 2 << ")\">" << y_label << "</text>\n";
}

void draw_legend(std::ofstream& out, const std::vector<std::string>& labels) {
  const double lx = kWidth - kMarginRight + 12;
  double ly = kMarginTop + 8;
  for (size_t i = 0; i < labels.size(); ++i) {
    out << "<rect x=\"" << lx << "\" y=\"" << ly - 9 << "\" width=\"12\" height=\"12\" fill=\""
        << kColors[i % 8] << "\"/>\n";
    out << "<text x=\"" << lx + 17 << "\" y=\"" << ly + 2
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << labels[i] << "</text>\n";
    ly += 20;
  }
}

}  // namespace

void write_line_chart(const std::string& path, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<Series>& series) {
  if (series.empty()) throw_error(ErrorCode::EmptyTable, "no series for " + path);
  Frame f{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
          std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto& s : series) {
    for (double x : s.x) { f.x_min = std::min(f.x_min, x); f.x_max = std::max(f.x_max, x); }
    for (double y : s.y) { f.y_min = std::min(f.y_min, y); f.y_max = std::max(f.y_max, y); }
  }
  if (!std::isfinite(f.x_min)) { f.x_min = 0; f.x_max = 1; f.y_min = 0; f.y_max = 1; }
  if (f.y_min > 0 && f.y_min < 0.25 * f.y_max) f.y_min = 0;

  std::ofstream out;
  open_svg(out, path);
  draw_axes(out, f, title, x_label, y_label);
  std::vector<std::string> labels;
  for (size_t i = 0; i < series.size(); ++i) {
    labels.push_back(series[i].label);
    out << "<polyline fill=\"none\" stroke=\"" << kColors[i % 8] << "\" stroke-width=\"1.5\""
        << " points=\"";
    for (size_t k = 0; k < series[i].x.size(); ++k) {
      if (k) out << " ";
      out << fmt(f.px(series[i].x[k])) << "," << fmt(f.py(series[i].y[k]));
    }
    out << "\"/>\n";
  }
  draw_legend(out, labels);
  out << "</svg>\n";
}

void write_bar_chart(const std::string& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<std::string>& series_labels,
                     const std::vector<BarGroup>& groups) {
  if (groups.empty()) throw_error(ErrorCode::EmptyTable, "no groups for " + path);
  double y_max = 0.0;
  for (const auto& g : groups) {
    for (double v : g.values) y_max = std::max(y_max, v);
  }
  if (y_max <= 0.0) y_max = 1.0;
  Frame f{0.0, static_cast<double>(groups.size()), 0.0, y_max * 1.05};

  std::ofstream out;
  open_svg(out, path);
  draw_axes(out, f, title, x_label, y_label);
  const size_t bars = series_labels.size();
  for (size_t g = 0; g < groups.size(); ++g) {
    const double cell = (f.px(1) - f.px(0));
    const double bw = cell * 0.7 / std::max<size_t>(bars, 1);
    for (size_t b = 0; b < groups[g].values.size() && b < bars; ++b) {
      const double x = f.px(static_cast<double>(g)) + cell * 0.15 + bw * b;
      const double y = f.py(groups[g].values[b]);
      const double y0 = f.py(0.0);
      out << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" width=\"" << fmt(bw * 0.9)
          << "\" height=\"" << fmt(y0 - y) << "\" fill=\"" << kColors[b % 8] << "\"/>\n";
    }
    out << "<text x=\"" << fmt(f.px(g + 0.5)) << "\" y=\"" << kHeight - kMarginBottom + 18
        << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">"
        << groups[g].label << "</text>\n";
  }
  draw_legend(out, series_labels);
  out << "</svg>\n";
}

}  // namespace rain::svg
