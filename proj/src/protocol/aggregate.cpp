#include "ebi/protocol/aggregate.hpp"

#include "ebi/core/error.hpp"

namespace ebi::protocol {

namespace {

void scale(Matrix& m, int calls) {
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) /= calls;
}

}  // namespace

Matrix aggregate_type1(const std::vector<ParsedType1>& parsed, const IdAxes& axes, int calls) {
  if (calls < 1) throw ValidationError("calls must be >= 1");
  Matrix counts(axes.size(), axes.size(), 0.0);
  for (const auto& p : parsed) {
    for (auto [b, a] : p.pairs) {
      auto i = axes.find(b);
      auto j = axes.find(a);
      if (i && j) counts(*i, *j) += 1.0;
    }
  }
  scale(counts, calls);
  return counts;
}

Matrix aggregate_type2(const std::vector<ParsedType2>& parsed, const IdAxes& axes, int calls) {
  if (calls < 1) throw ValidationError("calls must be >= 1");
  Matrix sums(axes.size(), axes.size(), 0.0);
  for (const auto& p : parsed) {
    for (const auto& [b, list] : p.ranked) {
      auto i = axes.find(b);
      if (!i) continue;
      for (auto [a, c] : list) {
        if (auto j = axes.find(a)) sums(*i, *j) += c;
      }
    }
  }
  scale(sums, calls);
  return sums;
}

}  // namespace ebi::protocol
