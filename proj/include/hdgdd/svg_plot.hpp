#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

// Minimal log-scale line charts of iteration histories.
namespace hdgdd {

struct HistorySeries {
  std::string label;
  std::vector<int> iteration;
  /// err_q, err_u, interface_diff per row; NaN when the cell is empty.
  std::array<std::vector<double>, 3> metric;
};

inline const std::array<const char*, 3> kMetricNames = {"err_q", "err_u", "interface_diff"};

inline HistorySeries read_history_csv(std::istream& is, std::string label) {
  HistorySeries s;
  s.label = std::move(label);
  std::string line;
  if (!std::getline(is, line) || line.rfind("iter,err_q,err_u,interface_diff", 0) != 0) {
    throw std::runtime_error("history CSV '" + s.label + "': unexpected header");
  }
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() < 4) {
      throw std::runtime_error("history CSV '" + s.label + "' line " + std::to_string(line_no) +
                               ": expected 5 columns");
    }
    try {
      s.iteration.push_back(std::stoi(cells[0]));
      for (int m = 0; m < 3; ++m) {
        s.metric[m].push_back(cells[m + 1].empty() ? std::numeric_limits<double>::quiet_NaN()
                                                   : std::stod(cells[m + 1]));
      }
    } catch (const std::logic_error&) {
      throw std::runtime_error("history CSV '" + s.label + "' line " + std::to_string(line_no) +
                               ": malformed number");
    }
  }
  return s;
}

namespace detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string xml_escape(const std::string& s) {
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

inline const char* color(std::size_t i) {
  static constexpr std::array<const char*, 12> kPalette = {
      "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
      "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#393b79", "#637939"};
  return kPalette[i % kPalette.size()];
}

}  // namespace detail

/// One panel per metric, log-scale y axis, one polyline per series.
inline void write_svg(std::ostream& os, const std::vector<HistorySeries>& series) {
  if (series.empty()) throw std::invalid_argument("plot needs at least one series");
  constexpr double kWidth = 640, kPanel = 300, kLeft = 70, kRight = 170, kTop = 30, kBottom = 40;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kPanel - kTop - kBottom;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
     << 3 * kPanel << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  int max_iter = 1;
  for (const auto& s : series) {
    for (int it : s.iteration) max_iter = std::max(max_iter, it);
  }
  for (int m = 0; m < 3; ++m) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& s : series) {
      for (double v : s.metric[m]) {
        if (v > 0.0 && std::isfinite(v)) {
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
      }
    }
    const double y0 = m * kPanel;
    os << "<g>\n<text x=\"" << detail::fmt(kLeft) << "\" y=\"" << detail::fmt(y0 + 18)
       << "\" font-size=\"13\">" << kMetricNames[m] << " (log scale)</text>\n";
    os << "<rect x=\"" << detail::fmt(kLeft) << "\" y=\"" << detail::fmt(y0 + kTop)
       << "\" width=\"" << detail::fmt(plot_w) << "\" height=\"" << detail::fmt(plot_h)
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    if (!(hi > 0.0)) {
      os << "<text x=\"" << detail::fmt(kLeft + 10) << "\" y=\"" << detail::fmt(y0 + kTop + 20)
         << "\">no positive data</text>\n</g>\n";
      continue;
    }
    int dlo = static_cast<int>(std::floor(std::log10(lo)));
    int dhi = static_cast<int>(std::ceil(std::log10(hi)));
    if (dhi == dlo) ++dhi;
    auto ypos = [&](double v) {
      return y0 + kTop + plot_h * (1.0 - (std::log10(v) - dlo) / (dhi - dlo));
    };
    auto xpos = [&](int it) {
      return kLeft + plot_w * (max_iter == 1 ? 0.5 : (it - 1.0) / (max_iter - 1.0));
    };
    const int step = std::max(1, (dhi - dlo + 7) / 8);
    for (int d = dlo; d <= dhi; d += step) {
      const double y = ypos(std::pow(10.0, d));
      os << "<line x1=\"" << detail::fmt(kLeft) << "\" y1=\"" << detail::fmt(y) << "\" x2=\""
         << detail::fmt(kLeft + plot_w) << "\" y2=\"" << detail::fmt(y)
         << "\" stroke=\"#dddddd\"/>\n";
      os << "<text x=\"" << detail::fmt(kLeft - 6) << "\" y=\"" << detail::fmt(y + 4)
         << "\" text-anchor=\"end\">1e" << d << "</text>\n";
    }
    os << "<text x=\"" << detail::fmt(kLeft) << "\" y=\"" << detail::fmt(y0 + kPanel - 12)
       << "\">1</text>\n";
    os << "<text x=\"" << detail::fmt(kLeft + plot_w) << "\" y=\""
       << detail::fmt(y0 + kPanel - 12) << "\" text-anchor=\"end\">" << max_iter
       << "</text>\n";
    os << "<text x=\"" << detail::fmt(kLeft + plot_w / 2) << "\" y=\""
       << detail::fmt(y0 + kPanel - 12) << "\" text-anchor=\"middle\">iteration</text>\n";
    for (std::size_t k = 0; k < series.size(); ++k) {
      const auto& s = series[k];
      std::string points;
      for (std::size_t r = 0; r < s.iteration.size(); ++r) {
        const double v = s.metric[m][r];
        if (!(v > 0.0) || !std::isfinite(v)) continue;
        if (!points.empty()) points += ' ';
        points += detail::fmt(xpos(s.iteration[r])) + "," + detail::fmt(ypos(v));
      }
      if (points.empty()) continue;
      os << "<polyline fill=\"none\" stroke=\"" << detail::color(k)
         << "\" stroke-width=\"1.5\" points=\"" << points << "\"/>\n";
      if (s.iteration.size() == 1) {
        const auto comma = points.find(',');
        os << "<circle cx=\"" << points.substr(0, comma) << "\" cy=\""
           << points.substr(comma + 1) << "\" r=\"3\" fill=\"" << detail::color(k) << "\"/>\n";
      }
    }
    for (std::size_t k = 0; k < series.size(); ++k) {
      const double ly = y0 + kTop + 10 + 14.0 * static_cast<double>(k);
      os << "<line x1=\"" << detail::fmt(kLeft + plot_w + 10) << "\" y1=\"" << detail::fmt(ly)
         << "\" x2=\"" << detail::fmt(kLeft + plot_w + 30) << "\" y2=\"" << detail::fmt(ly)
         << "\" stroke=\"" << detail::color(k) << "\" stroke-width=\"2\"/>\n";
      os << "<text x=\"" << detail::fmt(kLeft + plot_w + 35) << "\" y=\""
         << detail::fmt(ly + 4) << "\">" << detail::xml_escape(series[k].label) << "</text>\n";
    }
    os << "</g>\n";
  }
  os << "</svg>\n";
}

}  // namespace hdgdd
