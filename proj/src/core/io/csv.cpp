#include "csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "../error.hpp"

namespace stoat {

int CsvTable::column(std::string_view name) const {
  for (std::size_t k = 0; k < header.size(); ++k)
    if (header[k] == name) return static_cast<int>(k);
  return -1;
}

std::size_t CsvTable::require_column(std::string_view name) const {
  const int k = column(name);
  if (k < 0) fail(ErrorCode::kParse, path + ": missing column '" + std::string(name) + "'");
  return static_cast<std::size_t>(k);
}

std::string CsvTable::where(std::size_t row) const {
  return path + ":" + std::to_string(line_numbers[row]);
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.emplace_back(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::kIo, "cannot open '" + path + "'");
  CsvTable t;
  t.path = path;
  std::string line;
  std::size_t number = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (!have_header) {
      t.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != t.header.size())
      fail(ErrorCode::kParse, path + ":" + std::to_string(number) + ": expected " +
                                  std::to_string(t.header.size()) + " fields, found " +
                                  std::to_string(fields.size()));
    t.rows.push_back(std::move(fields));
    t.line_numbers.push_back(number);
  }
  require(have_header, ErrorCode::kParse, path + ": empty file (no header row)");
  return t;
}

std::string format_real(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return {buf, res.ptr};
}

double parse_real(std::string_view token, const std::string& where) {
  double v = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (!token.empty() && token.front() == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (token.empty() || res.ec != std::errc() || res.ptr != last)
    fail(ErrorCode::kParse, where + ": malformed number '" + std::string(token) + "'");
  if (!std::isfinite(v))
    fail(ErrorCode::kInvalidInput, where + ": non-finite value '" + std::string(token) + "'");
  return v;
}

long long parse_integer(std::string_view token, const std::string& where) {
  long long v = 0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (token.empty() || res.ec != std::errc() || res.ptr != token.data() + token.size())
    fail(ErrorCode::kParse, where + ": malformed integer '" + std::string(token) + "'");
  return v;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorCode::kIo, "cannot open '" + path + "' for writing");
  out << content;
  out.flush();
  require(static_cast<bool>(out), ErrorCode::kIo, "failed writing '" + path + "'");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::kIo, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace stoat
