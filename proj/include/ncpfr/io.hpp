#pragma once

// CSV and SVG artifacts. Files are written through a temporary and renamed
// so a crashed run never leaves a half-written table behind.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace ncpfr {

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);
std::string hex64(std::uint64_t h);

/// Shortest text that reads back to the same double (17 significant digits).
std::string format_double(double v);

struct CsvColumn {
  std::string name;
  std::string unit;
};

class CsvTable {
 public:
  CsvTable(std::string title, std::vector<CsvColumn> columns);

  void add_row(std::vector<std::string> cells);
  void add_row(const std::vector<double>& values);

  const std::vector<CsvColumn>& columns() const { return columns_; }
  std::size_t rows() const { return rows_.size(); }

  /// First line: "# <title> config_hash=<hex>"; second: "name [unit],...".
  std::string render(const std::string& config_hash) const;

 private:
  std::string title_;
  std::vector<CsvColumn> columns_;
  std::vector<std::vector<std::string>> rows_;
};

void write_file_atomic(const std::filesystem::path& path, const std::string& content);

struct SvgSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct SvgPlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
  std::string csv_reference;  // file name of the table the points come from
  std::vector<SvgSeries> series;

  std::string render() const;
};

}  // namespace ncpfr
