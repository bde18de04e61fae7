#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "optlab/core.hpp"

namespace optlab {

// Column-labelled numeric table, the shape every emitted CSV shares.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  Index column_index(const std::string& name) const;  // -1 when absent
};

CsvTable read_csv_table(std::istream& in);
CsvTable read_csv_table(const std::string& path);

struct AxesSpec {
  std::string x_column = "iter";
  std::vector<std::string> y_columns = {"loss"};
  std::string title;
  int width = 640;
  int height = 400;
};

// Deterministic line plot: fixed palette, fixed margins, coordinates
// rendered with two decimals, no timestamps. Same input, same bytes.
std::string render_svg(const CsvTable& table, const AxesSpec& spec);

void emit_svg(const std::string& csv_path, const AxesSpec& spec, const std::string& out_path);

}  // namespace optlab
