#include "ebi/core/csv.hpp"

#include "ebi/core/error.hpp"

namespace ebi::csv {

std::vector<Row> parse(std::string_view text) {
  if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);

  std::vector<Row> rows;
  Row row;
  std::string field;
  bool in_quotes = false;
  bool after_quote = false;  // just closed a quoted field
  bool row_started = false;
  std::size_t line = 1;

  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    after_quote = false;
  };
  auto end_row = [&] {
    end_field();
    rows.push_back(std::move(row));
    row.clear();
    row_started = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (in_quotes) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
          after_quote = true;
        }
      } else {
        if (ch == '\n') ++line;
        field.push_back(ch);
      }
      continue;
    }
    if (ch == ',') {
      end_field();
      row_started = true;
    } else if (ch == '\n' || ch == '\r') {
      if (ch == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (row_started || !field.empty() || after_quote) end_row();
      ++line;
    } else if (ch == '"') {
      if (!field.empty() || after_quote) {
        throw ValidationError("malformed CSV: stray quote on line " + std::to_string(line));
      }
      in_quotes = true;
      row_started = true;
    } else {
      if (after_quote) {
        throw ValidationError("malformed CSV: text after closing quote on line " +
                              std::to_string(line));
      }
      field.push_back(ch);
      row_started = true;
    }
  }
  if (in_quotes) {
    throw ValidationError("malformed CSV: unterminated quoted field starting before line " +
                          std::to_string(line));
  }
  if (row_started || !field.empty() || after_quote) end_row();
  return rows;
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

std::string format_row(const Row& row) {
  std::string out;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out.push_back(',');
    out += escape(row[i]);
  }
  out.push_back('\n');
  return out;
}

}  // namespace ebi::csv
