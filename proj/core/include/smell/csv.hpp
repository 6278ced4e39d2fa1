#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace smell::csv {

struct Row {
  std::size_t line = 0;  // 1-based physical line where the record starts
  std::vector<std::string> fields;
};

/// RFC 4180 reader: quoted fields may contain commas, doubled quotes and
/// newlines; LF and CRLF record terminators are both accepted. A UTF-8 BOM
/// at the start is skipped. Throws FormatError on an unterminated quote.
std::vector<Row> parse(std::string_view text);

/// Quotes a field when it contains a comma, quote, CR or LF.
std::string escape(std::string_view field);

/// One record terminated by '\n'.
std::string format_row(const std::vector<std::string>& fields);

}  // namespace smell::csv
