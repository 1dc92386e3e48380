// switchsound/plot.h

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

#ifndef SWITCHSOUND_PLOT_H_
#define SWITCHSOUND_PLOT_H_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace switchsound {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
};

// Horizontal reference line (e.g. a detection threshold).
struct PlotHLine {
  double y = 0.0;
  std::string label;
  std::string color = "#d62728";
};

// Static line chart as a standalone SVG. Output is fully deterministic:
// no timestamps, fixed number formatting.
void write_line_plot_svg(const std::filesystem::path& path, const std::string& title,
                         const std::string& x_label, const std::string& y_label,
                         const std::vector<PlotSeries>& series,
                         const std::optional<PlotHLine>& hline = std::nullopt);

}  // namespace switchsound

#endif  // SWITCHSOUND_PLOT_H_
