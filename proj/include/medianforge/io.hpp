#ifndef MEDIANFORGE_IO_HPP
#define MEDIANFORGE_IO_HPP

// CSV profiles and matrices: one row per voter (or matrix row), '.' decimal
// separator, optional header row detected by a non-numeric first row.

#include "medianforge/core.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace medianforge {

/// Malformed input file; the message carries "source:line:" context.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CsvTable {
  std::vector<std::string> header;
  /// Rows are voters, columns are coordinates.
  Matrix rows;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split_cells(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline bool parse_double(std::string_view cell, double& v) {
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  if (cell.empty()) return false;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  return ec == std::errc() && ptr == cell.data() + cell.size();
}

}  // namespace detail

inline CsvTable parse_csv(const std::string& text, const std::string& source = "<input>") {
  std::vector<std::vector<double>> values;
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  std::size_t width = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_cells(line);
    std::vector<double> row(cells.size());
    std::size_t bad = cells.size();
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (!detail::parse_double(cells[c], row[c]) || !std::isfinite(row[c])) {
        bad = c;
        break;
      }
    }
    if (first) {
      first = false;
      width = cells.size();
      if (bad != cells.size()) {
        bool any_numeric = false;
        double dummy = 0.0;
        for (const auto& c : cells) any_numeric |= detail::parse_double(c, dummy);
        if (!any_numeric) {
          for (const auto& c : cells) table.header.emplace_back(c);
          continue;
        }
      }
    }
    if (cells.size() != width) {
      throw ParseError(source + ":" + std::to_string(lineno) + ": expected " + std::to_string(width) +
                       " columns, found " + std::to_string(cells.size()));
    }
    if (bad != cells.size()) {
      throw ParseError(source + ":" + std::to_string(lineno) + ": column " + std::to_string(bad + 1) + ": '" +
                       std::string(cells[bad]) + "' is not a finite number");
    }
    values.push_back(std::move(row));
  }
  if (values.empty()) throw ParseError(source + ": no data rows");
  table.rows.resize(static_cast<Index>(values.size()), static_cast<Index>(width));
  for (std::size_t r = 0; r < values.size(); ++r) {
    for (std::size_t c = 0; c < width; ++c) table.rows(static_cast<Index>(r), static_cast<Index>(c)) = values[r][c];
  }
  return table;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline CsvTable read_csv(const std::string& path) { return parse_csv(read_text_file(path), path); }

/// Profile file: rows are voters. Returned as a d x n matrix (columns are voters).
inline Matrix read_profile(const std::string& path) { return read_csv(path).rows.transpose(); }

inline Matrix read_square_matrix(const std::string& path) {
  Matrix m = read_csv(path).rows;
  if (m.rows() != m.cols()) {
    throw ParseError(path + ": expected a square matrix, found " + std::to_string(m.rows()) + "x" +
                     std::to_string(m.cols()));
  }
  return m;
}

/// One positive weight per row.
inline Vector read_weights(const std::string& path) {
  const Matrix m = read_csv(path).rows;
  if (m.cols() != 1) throw ParseError(path + ": expected one weight per row");
  for (Index i = 0; i < m.rows(); ++i) {
    if (!(m(i, 0) > 0.0)) {
      throw ParseError(path + ": weight " + std::to_string(i + 1) + " is not positive");
    }
  }
  return m.col(0);
}

/// 17 significant digits, enough to round-trip any double.
inline std::string format_double(double v) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf, static_cast<std::size_t>(n));
}

/// Writes columns of `points` as rows.
inline std::string format_profile(const Matrix& points, const std::vector<std::string>& header = {}) {
  std::string out;
  for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
  if (!header.empty()) out += '\n';
  for (Index j = 0; j < points.cols(); ++j) {
    for (Index i = 0; i < points.rows(); ++i) {
      if (i) out += ',';
      out += format_double(points(i, j));
    }
    out += '\n';
  }
  return out;
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError(path + ": cannot open file for writing");
  out << text;
  if (!out) throw ParseError(path + ": write failed");
}

}  // namespace medianforge

#endif  // MEDIANFORGE_IO_HPP
