#pragma once

#include <string>
#include <vector>

namespace mfnet {

// Shortest decimal text that reads back to the same double; "nan", "inf"
// and "-inf" for non-finite values. Locale independent.
std::string format_double(double value);

// RFC 4180 table: comma separated, CRLF line ends, fields quoted only when
// they contain a comma, quote or line break.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns);

  CsvTable& add_row(std::vector<std::string> fields);
  std::size_t column_count() const { return columns_.size(); }
  std::size_t row_count() const { return rows_.size(); }
  std::string str() const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

// Writes to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace mfnet
