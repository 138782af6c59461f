#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace stoat {

// Comma-separated table with a header row. Quoting is not supported; fields
// are taken verbatim after stripping a trailing carriage return.
struct CsvTable {
  std::string path;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based file line of each row

  // Column index of `name`, or -1.
  int column(std::string_view name) const;
  // Like column() but throws kParse naming the file when absent.
  std::size_t require_column(std::string_view name) const;
  std::string where(std::size_t row) const;
};

CsvTable read_csv(const std::string& path);
std::vector<std::string> split_csv_line(std::string_view line);

// Shortest round-trip decimal form.
std::string format_real(double value);
double parse_real(std::string_view token, const std::string& where);
long long parse_integer(std::string_view token, const std::string& where);

// Writes `content` to `path`, throwing kIo on failure.
void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace stoat
