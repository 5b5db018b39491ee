#include "mvu/csv.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mvu/errors.hpp"

namespace mvu {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string points_csv(const Points& pts) {
  std::string out;
  for (Eigen::Index k = 0; k < pts.cols(); ++k) {
    if (k) out += ',';
    out += "x" + std::to_string(k);
  }
  out += '\n';
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    for (Eigen::Index k = 0; k < pts.cols(); ++k) {
      if (k) out += ',';
      out += format_double(pts(i, k));
    }
    out += '\n';
  }
  return out;
}

void write_points_csv(const std::string& path, const Points& pts) { write_text_file(path, points_csv(pts)); }

Points parse_points_csv(const std::string& text) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw ValidationError("points csv: empty input");
  const auto header = split_line(lines.front());
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (header[k] != "x" + std::to_string(k)) {
      throw ValidationError("points csv: header column " + std::to_string(k) + " should be x" + std::to_string(k));
    }
  }
  Points pts(static_cast<Eigen::Index>(lines.size() - 1), static_cast<Eigen::Index>(header.size()));
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto cells = split_line(lines[r]);
    if (cells.size() != header.size()) {
      throw ValidationError("points csv: line " + std::to_string(r + 1) + " has " +
                            std::to_string(cells.size()) + " fields");
    }
    for (std::size_t k = 0; k < cells.size(); ++k) {
      try {
        std::size_t used = 0;
        pts(static_cast<Eigen::Index>(r - 1), static_cast<Eigen::Index>(k)) = std::stod(cells[k], &used);
        if (used != cells[k].size()) throw std::invalid_argument("trailing characters");
      } catch (const std::exception&) {
        throw ValidationError("points csv: line " + std::to_string(r + 1) + " field " +
                              std::to_string(k + 1) + " is not a number");
      }
    }
  }
  return pts;
}

Points read_points_csv(const std::string& path) { return parse_points_csv(read_text_file(path)); }

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) {
    throw ValidationError("csv table: row has " + std::to_string(cells.size()) + " cells, header has " +
                          std::to_string(header_.size()));
  }
  rows_.push_back(std::move(cells));
}

std::string CsvTable::str() const {
  std::ostringstream os;
  auto emit = [&os](const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) {
      if (k) os << ',';
      os << cells[k];
    }
    os << '\n';
  };
  emit(header_);
  for (const auto& row : rows_) emit(row);
  return os.str();
}

void CsvTable::write(const std::string& path) const { write_text_file(path, str()); }

CsvTable CsvTable::parse(const std::string& text) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw ValidationError("csv: empty input");
  CsvTable table(split_line(lines.front()));
  for (std::size_t r = 1; r < lines.size(); ++r) table.add_row(split_line(lines[r]));
  return table;
}

CsvTable CsvTable::read(const std::string& path) { return parse(read_text_file(path)); }

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t k = 0; k < header_.size(); ++k)
    if (header_[k] == name) return k;
  throw ValidationError("csv: no column named '" + name + "'");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out << text;
}

}  // namespace mvu
