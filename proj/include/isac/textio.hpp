#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace isac {

// Shortest round-trip decimal form, '.' decimal point, locale-free.
std::string format_double(double value);
std::string format_int(long value);

// Rows of already-formatted cells; LF line endings, header mandatory.
class CsvBuilder {
 public:
  explicit CsvBuilder(std::vector<std::string> header);

  void comment(const std::string& text);  // '#' line above the header
  void row(const std::vector<std::string>& cells);
  std::string str() const;
  std::size_t rows() const { return row_count_; }

 private:
  std::size_t columns_;
  std::size_t row_count_ = 0;
  std::string comments_;
  std::string body_;
};

std::string sha256_hex(std::string_view data);

// Writes via a temp file and rename, so failed runs leave no partial output.
void write_file_atomic(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

}  // namespace isac
