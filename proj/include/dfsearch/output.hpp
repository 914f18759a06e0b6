#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace dfsearch {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> cells);
};

/// Header row first; numeric cells should come from format_double.
void write_csv(const std::filesystem::path& path, const CsvTable& table);

struct SvgSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  bool markers = false;  // points instead of a line
};

struct SvgPlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<SvgSeries> series;
  bool diagonal = false;  // y = x reference line
};

void write_svg(const std::filesystem::path& path, const SvgPlot& plot);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace dfsearch
