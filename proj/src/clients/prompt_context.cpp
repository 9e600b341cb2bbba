#include "ebi/clients/prompt_context.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <optional>

namespace ebi::clients {

namespace {

bool is_digit(char ch) { return ch >= '0' && ch <= '9'; }

std::optional<std::int64_t> read_int(std::string_view s, std::size_t& pos) {
  while (pos < s.size() && s[pos] == ' ') ++pos;
  std::size_t end = pos;
  while (end < s.size() && is_digit(s[end])) ++end;
  if (end == pos) return std::nullopt;
  std::int64_t v = 0;
  std::from_chars(s.data() + pos, s.data() + end, v);
  pos = end;
  return v;
}

// "[3, 7, 12]" starting at pos (after optional spaces).
std::vector<std::int64_t> read_list(std::string_view s, std::size_t pos) {
  std::vector<std::int64_t> out;
  while (pos < s.size() && s[pos] == ' ') ++pos;
  if (pos >= s.size() || s[pos] != '[') return out;
  ++pos;
  while (pos < s.size() && s[pos] != ']') {
    if (auto v = read_int(s, pos)) {
      out.push_back(*v);
    } else {
      ++pos;
    }
  }
  return out;
}

template <class Id>
void push_unique(std::vector<Id>& v, Id id) {
  if (std::find(v.begin(), v.end(), id) == v.end()) v.push_back(id);
}

bool has(std::string_view s, std::string_view needle) { return s.find(needle) != std::string_view::npos; }

}  // namespace

PromptContext extract_context(std::string_view prompt) {
  PromptContext ctx;
  if (has(prompt, "##Feedback Task")) {
    ctx.kind = PromptKind::feedback;
    return ctx;
  }
  if (has(prompt, "<count>")) {
    ctx.kind = PromptKind::seq_review;
  } else if (has(prompt, "S0=id_A")) {
    ctx.kind = PromptKind::seq_recursion;
  } else if (has(prompt, "\"id_A\": int")) {
    ctx.kind = PromptKind::seq_step;
  } else if (has(prompt, "certainty") || has(prompt, "確信度")) {
    ctx.kind = PromptKind::type2;
  } else {
    ctx.kind = PromptKind::type1;
  }

  // Data rows: lines opening with id_A:<n> / id_B:<n>.
  std::size_t line_start = 0;
  while (line_start <= prompt.size()) {
    std::size_t line_end = prompt.find('\n', line_start);
    if (line_end == std::string_view::npos) line_end = prompt.size();
    std::string_view line = prompt.substr(line_start, line_end - line_start);
    std::size_t p = 0;
    while (p < line.size() && (line[p] == ' ' || line[p] == '\t')) ++p;
    line = line.substr(p);
    if (line.size() > 5 && (line.substr(0, 5) == "id_A:" || line.substr(0, 5) == "id_B:")) {
      std::size_t pos = 5;
      if (auto v = read_int(line, pos)) {
        if (line[3] == 'A') {
          push_unique(ctx.candidates, IdA{*v});
        } else {
          push_unique(ctx.targets, IdB{*v});
          const auto rest = line.substr(pos);
          const auto q = rest.find("id_A:");
          std::size_t qpos = q + 5;
          if (ctx.kind == PromptKind::seq_review && q != std::string_view::npos && q < 4) {
            if (auto a = read_int(rest, qpos)) ctx.pairs.emplace_back(IdB{*v}, IdA{*a});
          }
        }
      }
    }
    if (line_end == prompt.size()) break;
    line_start = line_end + 1;
  }

  // Inline id lists used by the sequential prompts.
  if (ctx.kind == PromptKind::seq_step || ctx.kind == PromptKind::seq_recursion) {
    const auto s0 = prompt.find("S0=id_A");
    if (s0 != std::string_view::npos) {
      for (auto v : read_list(prompt, s0 + 7)) push_unique(ctx.candidates, IdA{v});
    } else {
      for (auto pos = prompt.find("id_A="); pos != std::string_view::npos; pos = prompt.find("id_A=", pos + 5)) {
        for (auto v : read_list(prompt, pos + 5)) push_unique(ctx.candidates, IdA{v});
      }
    }
    std::vector<std::vector<std::int64_t>> b_lists;
    for (auto pos = prompt.find("id_B="); pos != std::string_view::npos; pos = prompt.find("id_B=", pos + 5)) {
      std::size_t after = pos + 5;
      if (after < prompt.size() && prompt[after] == '[') {
        b_lists.push_back(read_list(prompt, after));
      } else if (auto v = read_int(prompt, after)) {
        push_unique(ctx.targets, IdB{*v});
      }
    }
    if (!b_lists.empty()) {
      for (auto v : b_lists.front()) push_unique(ctx.targets, IdB{v});
      for (std::size_t k = 1; k < b_lists.size(); ++k) {
        for (auto v : b_lists[k]) {
          if (std::find(ctx.targets.begin(), ctx.targets.end(), IdB{v}) == ctx.targets.end()) {
            push_unique(ctx.earlier_targets, IdB{v});
          }
        }
      }
    }
  }
  return ctx;
}

PromptContext extract_context(const CompletionRequest& req) {
  // The last user message carries the task; sequential follow-ups reference
  // ids inline, so the earlier history is not needed.
  for (auto it = req.messages.rbegin(); it != req.messages.rend(); ++it) {
    if (it->role == "user") return extract_context(it->content);
  }
  return extract_context(req.messages.back().content);
}

}  // namespace ebi::clients
