#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ebi::csv {

using Row = std::vector<std::string>;

// RFC 4180 reader: quoted fields may contain commas, quotes ("") and line
// breaks. A UTF-8 BOM is skipped and CRLF is accepted. Throws
// ValidationError on an unterminated quote or text after a closing quote.
std::vector<Row> parse(std::string_view text);

// Quotes a field only when it contains a separator, quote or line break.
std::string escape(std::string_view field);
std::string format_row(const Row& row);

}  // namespace ebi::csv
