#pragma once

#include "ebi/core/matrix.hpp"

namespace ebi::inference {

struct RegularizationPolicy {
  // Value given to aggregate cells that received no responses.
  double epsilon = 0.1;
};

void validate(const RegularizationPolicy& reg);

// Replaces every zero cell of c with epsilon. A cell whose aggregate is
// exactly zero is treated as having received no responses.
SubjectiveDegreeMatrix regularize(const SubjectiveDegreeMatrix& c, const RegularizationPolicy& reg);

// Posterior P(a_j | b_i) from subjective degrees via Bayes' theorem with
// likelihood P(b_i | a_j) = c_ji and prior P(a_j) = sum_i c_ji / C. In closed
// form:
//
//   conf_ij = c_ji * R_j / sum_j' c_j'i * R_j',   R_j = sum_k c_jk
//
// The normaliser C cancels, so the result is invariant to scaling c.
ConfidenceMatrix confidence_matrix(const SubjectiveDegreeMatrix& c,
                                   const RegularizationPolicy& reg = {});

// J_ij = s_ij * conf_ij. Both inputs must share identical id axes.
JudgmentMatrix judgment_matrix(const WeightMatrix& s, const ConfidenceMatrix& conf);

}  // namespace ebi::inference
