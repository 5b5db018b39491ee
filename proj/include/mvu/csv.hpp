#pragma once

#include <string>
#include <vector>

#include "mvu/manifolds.hpp"

namespace mvu {

/// 17 significant digits, enough to round-trip any double.
std::string format_double(double v);

/// Header x0,...,x{p-1}, one row per point.
std::string points_csv(const Points& pts);
void write_points_csv(const std::string& path, const Points& pts);
Points parse_points_csv(const std::string& text);
Points read_points_csv(const std::string& path);

/// A small column-oriented table that renders to CSV.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);
  void add_row(std::vector<std::string> cells);
  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }
  std::string str() const;
  void write(const std::string& path) const;
  static CsvTable parse(const std::string& text);
  static CsvTable read(const std::string& path);
  std::size_t column(const std::string& name) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace mvu
