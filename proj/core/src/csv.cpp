#include "cogmac/csv.hpp"

#include <charconv>
#include <cmath>

namespace cogmac {

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) return "0";  // also folds -0
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 12);
  std::string s(buf, res.ptr);
  // strip trailing zeros of the fraction ("%g" style)
  const auto exp = s.find('e');
  std::string mantissa = s.substr(0, exp);
  const std::string suffix = exp == std::string::npos ? "" : s.substr(exp);
  if (mantissa.find('.') != std::string::npos) {
    while (mantissa.back() == '0') mantissa.pop_back();
    if (mantissa.back() == '.') mantissa.pop_back();
  }
  return mantissa + suffix;
}

void CsvWriter::header(const std::vector<std::string>& columns) {
  for (const auto& c : columns) field(c);
  end_row();
}

CsvWriter& CsvWriter::field(std::string_view text) {
  if (!first_) out_ << ',';
  first_ = false;
  if (text.find_first_of(",\"\n\r") == std::string_view::npos) {
    out_ << text;
    return *this;
  }
  out_ << '"';
  for (char c : text) {
    if (c == '"') out_ << '"';
    out_ << c;
  }
  out_ << '"';
  return *this;
}

CsvWriter& CsvWriter::field(double value) { return field(std::string_view(format_number(value))); }

CsvWriter& CsvWriter::field(std::uint64_t value) { return field(std::string_view(std::to_string(value))); }

void CsvWriter::end_row() {
  out_ << '\n';
  first_ = true;
}

}  // namespace cogmac
