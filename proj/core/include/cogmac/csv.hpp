#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace cogmac {

/// Locale-independent shortest-form rendering with at most 12 significant
/// digits ('.' decimal separator). NaN and infinities print as nan / inf / -inf.
std::string format_number(double value);

/// Minimal CSV writer: fields containing ',', '"' or newlines are quoted.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  void header(const std::vector<std::string>& columns);
  CsvWriter& field(std::string_view text);
  CsvWriter& field(double value);
  CsvWriter& field(std::uint64_t value);
  void end_row();

 private:
  std::ostream& out_;
  bool first_ = true;
};

}  // namespace cogmac
