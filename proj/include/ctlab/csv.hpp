#pragma once
// Minimal CSV table writer for plot-ready exports. Numbers are written
// with max_digits10 precision so a round trip through text is lossless.

#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ctlab {

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add_row(const std::vector<double>& row) {
    if (row.size() != header_.size())
      throw std::invalid_argument("CsvTable: row width does not match header");
    rows_.push_back(row);
  }

  void write(std::ostream& out) const {
    for (std::size_t i = 0; i < header_.size(); ++i)
      out << (i ? "," : "") << header_[i];
    out << "\n";
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (const auto& row : rows_) {
      for (std::size_t i = 0; i < row.size(); ++i)
        out << (i ? "," : "") << row[i];
      out << "\n";
    }
  }

  std::string to_text() const {
    std::ostringstream out;
    write(out);
    return out.str();
  }

  void save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("CsvTable: cannot open '" + path + "'");
    write(out);
  }

  std::size_t row_count() const { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<double>> rows_;
};

}  // namespace ctlab
