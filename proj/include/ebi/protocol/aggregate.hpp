#pragma once

#include <vector>

#include "ebi/core/matrix.hpp"
#include "ebi/protocol/parsers.hpp"

namespace ebi::protocol {

// Both return an (id_B, id_A) matrix: cell = votes (Type 1) or summed
// certainty (Type 2) divided by `calls`. Parse failures add nothing to the
// numerator; the denominator stays the call count.
Matrix aggregate_type1(const std::vector<ParsedType1>& parsed, const IdAxes& axes, int calls);
Matrix aggregate_type2(const std::vector<ParsedType2>& parsed, const IdAxes& axes, int calls);

}  // namespace ebi::protocol
