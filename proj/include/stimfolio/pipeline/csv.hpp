#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace stimfolio::pipeline {

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double v);
double parse_double(std::string_view text);
std::uint64_t parse_u64(std::string_view text);

/// In-memory CSV table. Fields never contain commas, quotes or newlines;
/// the writer rejects any that do.
class CsvTable {
 public:
  CsvTable() = default;
  explicit CsvTable(std::vector<std::string> header);

  const std::vector<std::string>& header() const noexcept { return header_; }
  std::size_t rows() const noexcept { return rows_.size(); }
  std::size_t column(std::string_view name) const;  // throws if absent

  void add_row(std::vector<std::string> row);
  const std::string& at(std::size_t row, std::size_t col) const { return rows_[row][col]; }
  const std::string& at(std::size_t row, std::string_view name) const {
    return rows_[row][column(name)];
  }
  double number(std::size_t row, std::string_view name) const {
    return parse_double(at(row, name));
  }

  std::string to_string() const;
  void write(const std::string& path) const;
  static CsvTable read(const std::string& path);
  static CsvTable parse(std::string_view text);

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Writes `content` to `path` through a temporary file and rename.
void write_text_file(const std::string& path, std::string_view content);

}  // namespace stimfolio::pipeline
