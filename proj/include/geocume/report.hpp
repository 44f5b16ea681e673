#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace geocume {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> err;  // half-length of the error bar per point; empty for none
};

/// Static SVG line chart; identical inputs give identical bytes.
std::string render_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                       const std::vector<Series>& series, bool log_x);

/// Reads a results CSV (or a directory holding results.csv) and writes ks.svg, variance.svg
/// and cumulants.svg for the checks present. Returns the written files.
std::vector<std::filesystem::path> cmd_report(const std::filesystem::path& results,
                                              const std::filesystem::path& out_dir = {});

}  // namespace geocume
