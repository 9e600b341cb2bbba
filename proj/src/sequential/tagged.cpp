#include "ebi/sequential/tagged.hpp"

#include <algorithm>
#include <charconv>
#include <optional>

#include "ebi/protocol/parsers.hpp"

namespace ebi::sequential {

namespace {

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  for (auto& ch : out) {
    if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch - 'A' + 'a');
  }
  return out;
}

// Content of the first complete <tag>...</tag>: the first closing tag paired
// with the nearest opening tag before it.
std::optional<std::string> section(const std::string& text, const std::string& folded, const std::string& tag) {
  const std::string open = "<" + tag + ">";
  const std::string close = "</" + tag + ">";
  const auto end = folded.find(close);
  if (end == std::string::npos) return std::nullopt;
  const auto start = folded.rfind(open, end);
  if (start == std::string::npos) return std::nullopt;
  return text.substr(start + open.size(), end - start - open.size());
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<std::pair<IdB, IdA>> parse_pairs(std::string_view text) {
  const auto cleaned = protocol::clean_response(text);
  std::vector<std::pair<IdB, IdA>> out;
  for (const auto& m : protocol::scan_pairs(cleaned)) {
    auto it = std::find_if(out.begin(), out.end(), [&](const auto& p) { return p.first == m.b; });
    if (it == out.end()) {
      out.emplace_back(m.b, m.a);
    } else {
      it->second = m.a;
    }
  }
  return out;
}

TaggedReview parse_tagged(std::string_view response) {
  TaggedReview r;
  const std::string text(response);
  const std::string folded = lower_ascii(text);

  if (auto s = section(text, folded, "thinking")) {
    r.thinking = trim(*s);
  } else {
    r.missing.push_back("thinking");
  }
  if (auto s = section(text, folded, "result")) {
    r.result_pairs = parse_pairs(*s);
  } else {
    r.missing.push_back("result");
  }
  if (auto s = section(text, folded, "reflection")) {
    r.reflection = trim(*s);
  } else {
    r.missing.push_back("reflection");
  }
  if (auto s = section(text, folded, "count")) {
    const auto body = trim(protocol::clean_response(*s));
    int v = 0;
    auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), v);
    if (ec == std::errc() && ptr == body.data() + body.size() && v >= 0) {
      r.count = v;
    } else {
      r.count = 1;
      r.missing.push_back("count");
    }
  } else {
    r.count = 1;
    r.missing.push_back("count");
  }
  return r;
}

}  // namespace ebi::sequential
