#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace fenc::harness {

/// One plotted series: median line with a min..max band across seeds.
struct BandSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> lo, mid, hi;
};

/// Collapses per-seed curves (all sampled on x) into min/median/max.
BandSeries band_from_curves(std::string label, const std::vector<double>& x,
                            const std::vector<std::vector<double>>& curves);

struct ChartSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
};

std::string line_chart_svg(const ChartSpec& spec, const std::vector<BandSeries>& series);
std::string heatmap_svg(const std::string& title, const std::vector<double>& axis, const Eigen::MatrixXd& values);

/// Writes an SVG and the CSV (`x,min,median,max` per series) it was drawn from.
void write_line_chart(const std::filesystem::path& svg_path, const ChartSpec& spec,
                      const std::vector<BandSeries>& series);

/// Scans a results directory for loss curves, learning curves, sweep tables
/// and similarity grids, and emits one SVG (+ CSV) per figure under
/// <dir>/plots. Returns the files written.
std::vector<std::filesystem::path> emit_plots(const std::filesystem::path& dir);

}  // namespace fenc::harness
