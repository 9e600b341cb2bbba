#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ebi/core/ids.hpp"

namespace ebi::sequential {

// A conflict-review reply: <thinking>, <result>, <reflection>, <count>.
struct TaggedReview {
  std::string thinking;
  std::vector<std::pair<IdB, IdA>> result_pairs;  // first-mention order, last mention wins
  std::string reflection;
  int count = 1;  // missing or unreadable <count> keeps the review going
  std::vector<std::string> missing;  // names of absent sections
};

// Never throws. For each tag the first complete section wins; with nesting
// that is the innermost one.
TaggedReview parse_tagged(std::string_view response);

// Pairs from free text under the same rules as the Type 1 parser, without a
// block filter: last mention per id_B wins, order of first mention kept.
std::vector<std::pair<IdB, IdA>> parse_pairs(std::string_view text);

}  // namespace ebi::sequential
