#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace graphdiff {

/// Fixed-format number rendering used for all CSV output: 17 significant digits.
std::string format_number(double value);

/// Minimal RFC-4180 style writer; fields containing separators or quotes are quoted.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  CsvWriter& field(std::string_view text);
  CsvWriter& field(double value);
  CsvWriter& field(long long value);
  void end_row();
  void row(const std::vector<std::string>& fields);

 private:
  std::ostream& out_;
  bool first_ = true;
};

}  // namespace graphdiff
