#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ebi/core/ids.hpp"

namespace ebi::protocol {

// Ids a prompt was allowed to mention.
struct BlockIds {
  std::vector<IdA> a;
  std::vector<IdB> b;
};

struct ParsedType1 {
  std::vector<std::pair<IdB, IdA>> pairs;  // at most one per id_B, sorted by id_B
  bool failed = false;                     // nothing usable, or something dropped
};

struct ParsedType2 {
  std::map<IdB, std::vector<std::pair<IdA, double>>> ranked;
  bool failed = false;
};

// One "id_B:<n>, id_A:<m>" mention in a response, in order of appearance.
struct PairMention {
  IdB b{};
  IdA a{};
  std::size_t end = 0;  // offset just past the id_A number in the cleaned text
};

// Strips markdown emphasis, backticks and backslash escapes, and maps
// full-width ':' / ',' to ASCII so the scanners see one spelling.
std::string clean_response(std::string_view text);
// Every pair mention in an already-cleaned text.
std::vector<PairMention> scan_pairs(std::string_view cleaned);

// Never throws on bad input; failures are reported through the flag.
ParsedType1 parse_type1(std::string_view response, const BlockIds& block);
ParsedType2 parse_type2(std::string_view response, const BlockIds& block, std::size_t max_candidates);

}  // namespace ebi::protocol
