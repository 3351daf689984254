#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace lada {

/// RFC-4180 field quoting: fields containing a comma, quote or line break
/// are wrapped in quotes with inner quotes doubled.
std::string csv_field(std::string_view s);
/// Shortest text that parses back to exactly `v`.
std::string csv_number(double v);

/// Accumulates rows and writes them with CRLF-free "\n" line endings.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  void row(const std::vector<std::string>& fields);
  std::string str() const { return text_; }
  void save(const std::filesystem::path& path) const;

 private:
  std::size_t width_;
  std::string text_;
};

/// Whole-file text I/O; failures raise DataError.
std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

/// Parses an RFC-4180 document into rows of fields.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

}  // namespace lada
