#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace cfpp {

// A labeled rectangular grid: header row/column carry bin centers, cells are
// row-major, invalid cells serialize as empty fields.
struct GridData {
  std::vector<double> row_centers;
  std::vector<double> col_centers;
  std::vector<double> values;
  std::vector<std::uint8_t> valid;

  double at(size_t r, size_t c) const { return values[r * col_centers.size() + c]; }
  bool is_valid(size_t r, size_t c) const { return valid[r * col_centers.size() + c] != 0; }
};

void export_grid(const GridData& grid, const std::string& path, const std::string& header_comment);
GridData load_grid(const std::string& path);

// Raw-count 2-D histogram with evenly spaced bins spanning the data.
GridData histogram2d(std::span<const double> row_values, std::span<const double> col_values,
                     int row_bins, int col_bins);

// FNV-1a, used to stamp outputs with the config they came from.
std::string fnv1a_hex(const std::string& text);

}  // namespace cfpp
