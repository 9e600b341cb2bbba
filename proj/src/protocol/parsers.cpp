#include "ebi/protocol/parsers.hpp"

#include <algorithm>
#include <charconv>

namespace ebi::protocol {

namespace {

bool digit(char ch) { return ch >= '0' && ch <= '9'; }

char lower(char ch) { return (ch >= 'A' && ch <= 'Z') ? static_cast<char>(ch - 'A' + 'a') : ch; }

bool starts_with_ci(std::string_view s, std::size_t pos, std::string_view word) {
  if (pos + word.size() > s.size()) return false;
  for (std::size_t k = 0; k < word.size(); ++k) {
    if (lower(s[pos + k]) != word[k]) return false;
  }
  return true;
}

void skip_blanks(std::string_view s, std::size_t& pos) {
  while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
}

std::optional<std::int64_t> integer(std::string_view s, std::size_t& pos) {
  std::size_t end = pos;
  while (end < s.size() && digit(s[end]) && end - pos < 18) ++end;
  // longer digit runs would not fit; reject rather than truncate
  if (end == pos || (end < s.size() && digit(s[end]))) return std::nullopt;
  std::int64_t v = 0;
  std::from_chars(s.data() + pos, s.data() + end, v);
  pos = end;
  return v;
}

// "<label> [:=] <int>" at pos, e.g. "id_B : 12".
std::optional<std::int64_t> labelled_id(std::string_view s, std::size_t& pos, std::string_view label) {
  if (!starts_with_ci(s, pos, label)) return std::nullopt;
  std::size_t p = pos + label.size();
  skip_blanks(s, p);
  if (p >= s.size() || (s[p] != ':' && s[p] != '=')) return std::nullopt;
  ++p;
  skip_blanks(s, p);
  auto v = integer(s, p);
  if (v) pos = p;
  return v;
}

template <class Id>
bool contains(const std::vector<Id>& v, Id id) {
  return std::find(v.begin(), v.end(), id) != v.end();
}

// Certainty right after a pair: "0.9", "(90%)", "certainty: 0.85". Returns
// nothing when the line ends first.
std::optional<double> certainty_after(std::string_view s, std::size_t pos) {
  static constexpr std::string_view kWords[] = {"certainty", "confidence", "level", "確信度"};
  for (int guard = 0; guard < 16 && pos < s.size(); ++guard) {
    const char ch = s[pos];
    if (ch == ' ' || ch == '\t' || ch == '(' || ch == ':' || ch == '-' || ch == '=' || ch == ',' || ch == '|' ||
        ch == '[') {
      ++pos;
      continue;
    }
    bool word = false;
    for (auto w : kWords) {
      if (starts_with_ci(s, pos, w)) {
        pos += w.size();
        word = true;
        break;
      }
    }
    if (!word) break;
  }
  if (pos >= s.size() || !(digit(s[pos]) || (s[pos] == '.' && pos + 1 < s.size() && digit(s[pos + 1])))) {
    return std::nullopt;
  }
  std::size_t end = pos;
  while (end < s.size() && digit(s[end])) ++end;
  if (end < s.size() && s[end] == '.') {
    ++end;
    while (end < s.size() && digit(s[end])) ++end;
  }
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data() + pos, s.data() + end, v);
  if (ec != std::errc()) return std::nullopt;
  std::size_t after = end;
  skip_blanks(s, after);
  const bool percent = after < s.size() && s[after] == '%';
  if (percent || v > 1.0) v /= 100.0;
  return std::clamp(v, 0.0, 1.0);
}

}  // namespace

std::string clean_response(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t k = 0; k < text.size(); ++k) {
    const char ch = text[k];
    if (ch == '*' || ch == '`' || ch == '\\') continue;
    // U+FF1A fullwidth colon, U+FF0C fullwidth comma, U+3001 ideographic comma,
    // U+FF05 fullwidth percent.
    const std::string_view rest = text.substr(k);
    if (rest.substr(0, 3) == "\xEF\xBC\x9A") {
      out += ':';
      k += 2;
    } else if (rest.substr(0, 3) == "\xEF\xBC\x8C" || rest.substr(0, 3) == "\xE3\x80\x81") {
      out += ',';
      k += 2;
    } else if (rest.substr(0, 3) == "\xEF\xBC\x85") {
      out += '%';
      k += 2;
    } else {
      out += ch;
    }
  }
  return out;
}

std::vector<PairMention> scan_pairs(std::string_view s) {
  std::vector<PairMention> out;
  for (std::size_t pos = 0; pos + 4 < s.size(); ++pos) {
    if (lower(s[pos]) != 'i') continue;
    std::size_t p = pos;
    auto b = labelled_id(s, p, "id_b");
    if (!b) continue;
    // Separator between the two halves: blanks, commas, semicolons, arrows.
    for (int guard = 0; guard < 6 && p < s.size(); ++guard) {
      const char ch = s[p];
      if (ch == ' ' || ch == '\t' || ch == ',' || ch == ';' || ch == '-' || ch == '>' || ch == '/') {
        ++p;
      } else {
        break;
      }
    }
    auto a = labelled_id(s, p, "id_a");
    if (!a) continue;
    out.push_back({IdB{*b}, IdA{*a}, p});
    pos = p - 1;
  }
  return out;
}

ParsedType1 parse_type1(std::string_view response, const BlockIds& block) {
  ParsedType1 out;
  const auto cleaned = clean_response(response);
  std::map<IdB, IdA> last;
  for (const auto& m : scan_pairs(cleaned)) {
    if (!contains(block.b, m.b) || !contains(block.a, m.a)) {
      out.failed = true;
      continue;
    }
    last[m.b] = m.a;
  }
  out.pairs.assign(last.begin(), last.end());
  if (out.pairs.empty()) out.failed = true;
  return out;
}

ParsedType2 parse_type2(std::string_view response, const BlockIds& block, std::size_t max_candidates) {
  ParsedType2 out;
  const auto cleaned = clean_response(response);
  for (const auto& m : scan_pairs(cleaned)) {
    if (!contains(block.b, m.b) || !contains(block.a, m.a)) {
      out.failed = true;
      continue;
    }
    const auto c = certainty_after(cleaned, m.end);
    if (!c) {
      out.failed = true;
      continue;
    }
    auto& list = out.ranked[m.b];
    const bool seen = std::any_of(list.begin(), list.end(), [&](const auto& e) { return e.first == m.a; });
    if (seen || list.size() >= max_candidates) continue;
    list.emplace_back(m.a, *c);
  }
  if (out.ranked.empty()) out.failed = true;
  return out;
}

}  // namespace ebi::protocol
