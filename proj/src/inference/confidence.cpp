#include "ebi/inference/confidence.hpp"

#include <cassert>
#include <cmath>

#include "ebi/core/error.hpp"

namespace ebi::inference {

void validate(const RegularizationPolicy& reg) {
  if (!(reg.epsilon > 0.0 && reg.epsilon < 1.0)) {
    throw ValidationError("epsilon must lie in (0, 1)");
  }
}

SubjectiveDegreeMatrix regularize(const SubjectiveDegreeMatrix& c, const RegularizationPolicy& reg) {
  validate(reg);
  check_shape(c.axes, c.entries, "subjective degree matrix");
  SubjectiveDegreeMatrix out = c;
  const std::size_t n = c.size();
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i)
      if (out.entries(j, i) == 0.0) out.entries(j, i) = reg.epsilon;
  return out;
}

ConfidenceMatrix confidence_matrix(const SubjectiveDegreeMatrix& raw, const RegularizationPolicy& reg) {
  const SubjectiveDegreeMatrix c = regularize(raw, reg);
  const std::size_t n = c.size();

  std::vector<double> row_mass(n, 0.0);  // R_j
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < n; ++k) row_mass[j] += c.entries(j, k);

  ConfidenceMatrix conf{c.axes, Matrix(n, n)};
  for (std::size_t i = 0; i < n; ++i) {
    double denom = 0.0;
    for (std::size_t j = 0; j < n; ++j) denom += c.entries(j, i) * row_mass[j];
    // Every regularised cell is >= epsilon, so the denominator is positive.
    assert(denom > 0.0 && std::isfinite(denom));
    if (!(denom > 0.0) || !std::isfinite(denom)) {
      throw Error("confidence row undefined for id_B " + to_string(c.axes.b_ids()[i]));
    }
    for (std::size_t j = 0; j < n; ++j) conf.entries(i, j) = c.entries(j, i) * row_mass[j] / denom;
  }
  return conf;
}

JudgmentMatrix judgment_matrix(const WeightMatrix& s, const ConfidenceMatrix& conf) {
  check_shape(s.axes, s.entries, "weight matrix");
  check_shape(conf.axes, conf.entries, "confidence matrix");
  if (!(s.axes == conf.axes)) {
    throw ValidationError("weight and confidence matrices have different id axes");
  }
  const std::size_t n = s.size();
  JudgmentMatrix j{s.axes, Matrix(n, n)};
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) j.entries(r, c) = s.entries(r, c) * conf.entries(r, c);
  return j;
}

}  // namespace ebi::inference
