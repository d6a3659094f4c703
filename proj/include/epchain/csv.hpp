#pragma once

#include <string>
#include <vector>

namespace epchain {

inline constexpr const char* kVersion = "0.1.0";

struct CsvTable {
  std::vector<std::string> comments;  // written as "# <line>"
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);
  std::size_t column(const std::string& name) const;  // throws UsageError if absent
};

// Shortest round-trip representation.
std::string format_double(double v);

std::string render_csv(const CsvTable& t);
// Writes to path.tmp then renames over path.
void write_file_atomic(const std::string& path, const std::string& content);
CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::string& path);

}  // namespace epchain
