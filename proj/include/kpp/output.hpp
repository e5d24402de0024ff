#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace kpp {

/// Writes `content` to a sibling temp file and renames it over `path`, so a
/// reader never sees a half-written file.
void write_atomic(const std::filesystem::path& path, std::string_view content);

/// Round-trip formatting (%.17g) used for every number written to CSV.
std::string format_number(double v);

/// CSV text from equally long columns, one header name per column.
std::string csv_table(const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& columns);

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
  int width = 640;
  int height = 420;
};

/// Minimal standalone SVG line chart with axes, ticks and a legend.
std::string svg_line_plot(const PlotSpec& spec);

}  // namespace kpp
