#include "optlab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace optlab {

Index CsvTable::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return static_cast<Index>(i);
  }
  return -1;
}

CsvTable read_csv_table(std::istream& in) {
  CsvTable table;
  std::string line;
  if (!std::getline(in, line) || line.empty()) {
    throw std::runtime_error("csv table: missing header");
  }
  std::stringstream header(line);
  std::string cell;
  while (std::getline(header, cell, ',')) table.columns.push_back(cell);
  if (table.columns.empty()) throw std::runtime_error("csv table: empty header");

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    row.reserve(table.columns.size());
    std::size_t pos = 0;
    while (pos <= line.size()) {
      const std::size_t comma = line.find(',', pos);
      const std::string value =
          line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      char* end = nullptr;
      row.push_back(std::strtod(value.c_str(), &end));
      if (end == value.c_str() || *end != '\0') {
        throw std::runtime_error("csv table: malformed value '" + value + "'");
      }
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (row.size() != table.columns.size()) {
      throw std::runtime_error("csv table: row width does not match header");
    }
    table.rows.push_back(std::move(row));
  }
  if (table.rows.empty()) throw std::runtime_error("csv table: no data rows");
  return table;
}

CsvTable read_csv_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  return read_csv_table(in);
}

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
constexpr int kPaletteSize = 8;
constexpr double kMargin = 48.0;

std::string coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

std::string render_svg(const CsvTable& table, const AxesSpec& spec) {
  if (spec.width < 100 || spec.height < 100) {
    throw std::invalid_argument("render_svg: canvas too small");
  }
  if (spec.y_columns.empty()) throw std::invalid_argument("render_svg: no y columns");
  const Index xi = table.column_index(spec.x_column);
  if (xi < 0) throw std::invalid_argument("render_svg: missing x column " + spec.x_column);
  std::vector<Index> yis;
  for (const auto& name : spec.y_columns) {
    const Index yi = table.column_index(name);
    if (yi < 0) throw std::invalid_argument("render_svg: missing y column " + name);
    yis.push_back(yi);
  }

  double xmin = table.rows.front()[static_cast<std::size_t>(xi)];
  double xmax = xmin;
  double ymin = table.rows.front()[static_cast<std::size_t>(yis.front())];
  double ymax = ymin;
  for (const auto& row : table.rows) {
    const double x = row[static_cast<std::size_t>(xi)];
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
    for (Index yi : yis) {
      const double y = row[static_cast<std::size_t>(yi)];
      if (!std::isfinite(y)) continue;  // diverged tails still plot the finite prefix
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  if (xmax == xmin) {
    xmin -= 1.0;
    xmax += 1.0;
  }
  if (ymax == ymin) {
    ymin -= 1.0;
    ymax += 1.0;
  }

  const double w = spec.width;
  const double h = spec.height;
  const double px = (w - 2.0 * kMargin) / (xmax - xmin);
  const double py = (h - 2.0 * kMargin) / (ymax - ymin);
  const auto sx = [&](double x) { return kMargin + (x - xmin) * px; };
  const auto sy = [&](double y) { return h - kMargin - (y - ymin) * py; };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\""
      << spec.height << "\" viewBox=\"0 0 " << spec.width << " " << spec.height << "\">\n";
  out << "<rect width=\"" << spec.width << "\" height=\"" << spec.height
      << "\" fill=\"#ffffff\"/>\n";
  if (!spec.title.empty()) {
    out << "<text x=\"" << coord(w / 2) << "\" y=\"20\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"14\">"
        << spec.title << "</text>\n";
  }
  // Axes with min/max tick labels.
  out << "<line x1=\"" << coord(kMargin) << "\" y1=\"" << coord(h - kMargin) << "\" x2=\""
      << coord(w - kMargin) << "\" y2=\"" << coord(h - kMargin)
      << "\" stroke=\"#000000\" stroke-width=\"1\"/>\n";
  out << "<line x1=\"" << coord(kMargin) << "\" y1=\"" << coord(kMargin) << "\" x2=\""
      << coord(kMargin) << "\" y2=\"" << coord(h - kMargin)
      << "\" stroke=\"#000000\" stroke-width=\"1\"/>\n";
  out << "<text x=\"" << coord(kMargin) << "\" y=\"" << coord(h - kMargin + 16)
      << "\" font-family=\"sans-serif\" font-size=\"10\">" << tick_label(xmin) << "</text>\n";
  out << "<text x=\"" << coord(w - kMargin) << "\" y=\"" << coord(h - kMargin + 16)
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << tick_label(xmax)
      << "</text>\n";
  out << "<text x=\"" << coord(kMargin - 4) << "\" y=\"" << coord(h - kMargin)
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << tick_label(ymin)
      << "</text>\n";
  out << "<text x=\"" << coord(kMargin - 4) << "\" y=\"" << coord(kMargin + 4)
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << tick_label(ymax)
      << "</text>\n";

  for (std::size_t s = 0; s < yis.size(); ++s) {
    const char* color = kPalette[s % kPaletteSize];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (const auto& row : table.rows) {
      const double y = row[static_cast<std::size_t>(yis[s])];
      if (!std::isfinite(y)) continue;
      if (!first) out << ' ';
      out << coord(sx(row[static_cast<std::size_t>(xi)])) << ',' << coord(sy(y));
      first = false;
    }
    out << "\"/>\n";
    // Legend swatch and label, stacked top-right.
    const double ly = kMargin + 14.0 * static_cast<double>(s);
    out << "<rect x=\"" << coord(w - kMargin - 90) << "\" y=\"" << coord(ly) << "\" width=\"10\" "
           "height=\"10\" fill=\""
        << color << "\"/>\n";
    out << "<text x=\"" << coord(w - kMargin - 76) << "\" y=\"" << coord(ly + 9)
        << "\" font-family=\"sans-serif\" font-size=\"10\">" << spec.y_columns[s] << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

void emit_svg(const std::string& csv_path, const AxesSpec& spec, const std::string& out_path) {
  const CsvTable table = read_csv_table(csv_path);
  const std::string svg = render_svg(table, spec);
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot open for writing: " + out_path);
  out << svg;
  if (!out.good()) throw std::runtime_error("write failed: " + out_path);
}

}  // namespace optlab
