// core/src/plot.cc

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "switchsound/plot.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "switchsound/textio.h"

namespace switchsound {

namespace {

constexpr double kWidth = 720.0, kHeight = 440.0;
constexpr double kLeft = 70.0, kRight = 30.0, kTop = 44.0, kBottom = 56.0;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

std::vector<double> nice_ticks(double lo, double hi, int target) {
  if (hi <= lo) hi = lo + 1.0;
  const double raw = (hi - lo) / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (raw <= m * mag) {
      step = m * mag;
      break;
    }
  }
  std::vector<double> ticks;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-12 * step; t += step) {
    ticks.push_back(t);
  }
  return ticks;
}

}  // namespace

void write_line_plot_svg(const std::filesystem::path& path, const std::string& title,
                         const std::string& x_label, const std::string& y_label,
                         const std::vector<PlotSeries>& series,
                         const std::optional<PlotHLine>& hline) {
  double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
  bool first = true;
  for (const PlotSeries& s : series) {
    if (s.x.size() != s.y.size()) throw std::runtime_error("plot: series size mismatch");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (first) {
        xmin = xmax = s.x[i];
        ymin = ymax = s.y[i];
        first = false;
      }
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  }
  if (hline) {
    ymin = std::min(ymin, hline->y);
    ymax = std::max(ymax, hline->y);
  }
  if (xmax <= xmin) xmax = xmin + 1.0;
  if (ymax <= ymin) ymax = ymin + 1.0;
  const double ypad = 0.06 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto sx = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * pw; };
  auto sy = [&](double y) { return kTop + ph - (y - ymin) / (ymax - ymin) * ph; };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"15\">" << escape_xml(title) << "</text>\n";

  for (double t : nice_ticks(xmin, xmax, 6)) {
    const double px = sx(t);
    out << "<line x1=\"" << fmt(px) << "\" y1=\"" << fmt(kTop) << "\" x2=\"" << fmt(px)
        << "\" y2=\"" << fmt(kTop + ph) << "\" stroke=\"#dddddd\"/>\n";
    out << "<text x=\"" << fmt(px) << "\" y=\"" << fmt(kTop + ph + 18)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(t)
        << "</text>\n";
  }
  for (double t : nice_ticks(ymin, ymax, 6)) {
    const double py = sy(t);
    out << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(py) << "\" x2=\"" << fmt(kLeft + pw)
        << "\" y2=\"" << fmt(py) << "\" stroke=\"#dddddd\"/>\n";
    out << "<text x=\"" << fmt(kLeft - 8) << "\" y=\"" << fmt(py + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(t)
        << "</text>\n";
  }
  out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"#333333\"/>\n";
  out << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 14
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
      << escape_xml(x_label) << "</text>\n";
  out << "<text x=\"18\" y=\"" << kTop + ph / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
      << "transform=\"rotate(-90 18 " << kTop + ph / 2 << ")\">" << escape_xml(y_label)
      << "</text>\n";

  if (hline) {
    const double py = sy(hline->y);
    out << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(py) << "\" x2=\"" << fmt(kLeft + pw)
        << "\" y2=\"" << fmt(py) << "\" stroke=\"" << hline->color
        << "\" stroke-dasharray=\"6 4\"/>\n";
    if (!hline->label.empty()) {
      out << "<text x=\"" << fmt(kLeft + pw - 4) << "\" y=\"" << fmt(py - 5)
          << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" fill=\""
          << hline->color << "\">" << escape_xml(hline->label) << "</text>\n";
    }
  }

  double legend_y = kTop + 14;
  for (const PlotSeries& s : series) {
    out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.6\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (i > 0) out << " ";
      out << fmt(sx(s.x[i])) << "," << fmt(sy(s.y[i]));
    }
    out << "\"/>\n";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      out << "<circle cx=\"" << fmt(sx(s.x[i])) << "\" cy=\"" << fmt(sy(s.y[i]))
          << "\" r=\"2.2\" fill=\"" << s.color << "\"/>\n";
    }
    if (!s.label.empty()) {
      out << "<line x1=\"" << fmt(kLeft + 8) << "\" y1=\"" << fmt(legend_y) << "\" x2=\""
          << fmt(kLeft + 30) << "\" y2=\"" << fmt(legend_y) << "\" stroke=\"" << s.color
          << "\" stroke-width=\"1.6\"/>\n";
      out << "<text x=\"" << fmt(kLeft + 36) << "\" y=\"" << fmt(legend_y + 4)
          << "\" font-family=\"sans-serif\" font-size=\"11\">" << escape_xml(s.label)
          << "</text>\n";
      legend_y += 16;
    }
  }
  out << "</svg>\n";
  write_text_file(path, out.str());
}

}  // namespace switchsound
