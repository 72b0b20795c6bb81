#include "cfpp/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cfpp/errors.hpp"

namespace cfpp {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void export_grid(const GridData& grid, const std::string& path, const std::string& header_comment) {
  const size_t rows = grid.row_centers.size();
  const size_t cols = grid.col_centers.size();
  if (grid.values.size() != rows * cols || grid.valid.size() != rows * cols)
    throw DomainError("export_grid: grid not rectangular");
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  if (!header_comment.empty()) out << "# " << header_comment << '\n';
  for (size_t c = 0; c < cols; ++c) out << ',' << fmt(grid.col_centers[c]);
  out << '\n';
  for (size_t r = 0; r < rows; ++r) {
    out << fmt(grid.row_centers[r]);
    for (size_t c = 0; c < cols; ++c) {
      out << ',';
      if (grid.is_valid(r, c)) out << fmt(grid.at(r, c));
    }
    out << '\n';
  }
}

GridData load_grid(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  GridData grid;
  std::string line;
  bool header_done = false;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> cells;
    std::string cur;
    std::stringstream ss(line);
    while (std::getline(ss, cur, ',')) cells.push_back(cur);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (!header_done) {
      for (size_t c = 1; c < cells.size(); ++c) grid.col_centers.push_back(std::stod(cells[c]));
      header_done = true;
      continue;
    }
    grid.row_centers.push_back(std::stod(cells[0]));
    for (size_t c = 1; c < cells.size(); ++c) {
      if (cells[c].empty()) {
        grid.values.push_back(0.0);
        grid.valid.push_back(0);
      } else {
        grid.values.push_back(std::stod(cells[c]));
        grid.valid.push_back(1);
      }
    }
  }
  if (grid.values.size() != grid.row_centers.size() * grid.col_centers.size())
    throw SchemaError("load_grid: ragged grid in " + path);
  return grid;
}

GridData histogram2d(std::span<const double> row_values, std::span<const double> col_values,
                     int row_bins, int col_bins) {
  if (row_values.size() != col_values.size() || row_values.empty())
    throw DomainError("histogram2d: mismatched or empty inputs");
  if (row_bins < 1 || col_bins < 1) throw DomainError("histogram2d: bins must be positive");

  const auto [rmin_it, rmax_it] = std::minmax_element(row_values.begin(), row_values.end());
  const auto [cmin_it, cmax_it] = std::minmax_element(col_values.begin(), col_values.end());
  double rmin = *rmin_it;
  double rmax = *rmax_it;
  double cmin = *cmin_it;
  double cmax = *cmax_it;
  if (rmax == rmin) rmax = rmin + 1.0;
  if (cmax == cmin) cmax = cmin + 1.0;
  const double rstep = (rmax - rmin) / row_bins;
  const double cstep = (cmax - cmin) / col_bins;

  GridData grid;
  for (int r = 0; r < row_bins; ++r) grid.row_centers.push_back(rmin + (r + 0.5) * rstep);
  for (int c = 0; c < col_bins; ++c) grid.col_centers.push_back(cmin + (c + 0.5) * cstep);
  grid.values.assign(static_cast<size_t>(row_bins) * col_bins, 0.0);
  grid.valid.assign(static_cast<size_t>(row_bins) * col_bins, 1);
  for (size_t i = 0; i < row_values.size(); ++i) {
    int r = static_cast<int>((row_values[i] - rmin) / rstep);
    int c = static_cast<int>((col_values[i] - cmin) / cstep);
    r = std::clamp(r, 0, row_bins - 1);
    c = std::clamp(c, 0, col_bins - 1);
    grid.values[static_cast<size_t>(r) * col_bins + c] += 1.0;
  }
  return grid;
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t hash = 0xCBF29CE484222325ULL;
  for (unsigned char ch : text) {
    hash ^= ch;
    hash *= 0x100000001B3ULL;
  }
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

}  // namespace cfpp
