#pragma once

#include "ebi/core/matrix.hpp"
#include "ebi/core/specs.hpp"

namespace ebi::inference {

// Duplicate-free assignment by repeated global argmax: take the largest
// remaining entry, record it, strike its row and column, repeat n times.
// Ties go to the lowest row index, then the lowest column index, in the
// matrix's axis order. NaN entries are rejected.
Assignment greedy_assign(const JudgmentMatrix& judgment);

struct OptimalOptions {
  // Up to this size every permutation is enumerated; above it the Hungarian
  // method is used.
  std::size_t exhaustive_limit = 8;
};

// Maximum-total bijection. Not part of the matching method itself; used to
// check how far greedy selection is from the optimum.
Assignment optimal_assign(const JudgmentMatrix& judgment, const OptimalOptions& options = {});

double assignment_total(const JudgmentMatrix& judgment, const Assignment& assignment);

}  // namespace ebi::inference
