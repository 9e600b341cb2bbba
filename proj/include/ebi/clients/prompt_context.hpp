#pragma once

#include <string_view>
#include <utility>
#include <vector>

#include "ebi/clients/backend.hpp"
#include "ebi/core/ids.hpp"

namespace ebi::clients {

enum class PromptKind { unknown, type1, type2, seq_step, seq_recursion, seq_review, solve, feedback };

// What a simulated judge can read off a rendered prompt: the task kind, the
// candidate id_A and the id_B it has to answer for.
struct PromptContext {
  PromptKind kind = PromptKind::unknown;
  std::vector<IdA> candidates;
  std::vector<IdB> targets;
  std::vector<IdB> earlier_targets;           // recursion: previously judged id_B
  std::vector<std::pair<IdB, IdA>> pairs;     // review: pairs under review
};

PromptContext extract_context(const CompletionRequest& req);
PromptContext extract_context(std::string_view prompt);

}  // namespace ebi::clients
