#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace contactdyn::io {

/// Shortest round-trip decimal form; "nan"/"inf"/"-inf" for non-finite values.
std::string format_double(double v);

/// Header row, ',' separator, LF endings, shortest round-trip numbers.
class CsvWriter {
 public:
  CsvWriter(std::ostream& os, const std::vector<std::string>& header);
  void row(const std::vector<double>& values);
  void row(const std::vector<std::string>& cells);

 private:
  std::ostream& os_;
  std::size_t width_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

/// Reads a numeric CSV with a header row. Throws std::runtime_error with the
/// line number on malformed input.
CsvTable read_csv(std::istream& is);
CsvTable read_csv_file(const std::string& path);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view text);
std::string hex64(std::uint64_t v);

/// Writes `content` to path, creating parent directories.
void write_text_file(const std::string& path, const std::string& content);

}  // namespace contactdyn::io
