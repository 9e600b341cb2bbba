#include "ebi/inference/assignment.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "ebi/core/error.hpp"

namespace ebi::inference {

namespace {

void check_input(const JudgmentMatrix& judgment) {
  check_shape(judgment.axes, judgment.entries, "judgment matrix", false);
}

Assignment from_columns(const JudgmentMatrix& judgment, const std::vector<std::size_t>& col_of_row) {
  Assignment out;
  const auto& axes = judgment.axes;
  for (std::size_t i = 0; i < col_of_row.size(); ++i) {
    const IdB b = axes.b_ids()[i];
    const IdA a = axes.a_ids()[col_of_row[i]];
    out.pairs.emplace(b, a);
    out.trace.push_back(TraceStep{static_cast<int>(i), b, a, judgment.entries(i, col_of_row[i])});
  }
  return out;
}

// Hungarian method, O(n^3), on costs = -J. Potentials formulation with
// 1-based sentinel row/column.
std::vector<std::size_t> hungarian_max(const Matrix& score) {
  const std::size_t n = score.rows();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = -score(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> col_of_row(n);
  for (std::size_t j = 1; j <= n; ++j) col_of_row[p[j] - 1] = j - 1;
  return col_of_row;
}

}  // namespace

Assignment greedy_assign(const JudgmentMatrix& judgment) {
  check_input(judgment);
  const std::size_t n = judgment.size();
  const auto& m = judgment.entries;
  std::vector<char> row_used(n, 0), col_used(n, 0);
  Assignment out;
  for (std::size_t step = 0; step < n; ++step) {
    std::size_t best_r = n, best_c = n;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < n; ++r) {
      if (row_used[r]) continue;
      for (std::size_t c = 0; c < n; ++c) {
        if (col_used[c]) continue;
        // Strict comparison keeps the first (lowest row, then column) maximum.
        if (best_r == n || m(r, c) > best) {
          best = m(r, c);
          best_r = r;
          best_c = c;
        }
      }
    }
    row_used[best_r] = 1;
    col_used[best_c] = 1;
    const IdB b = judgment.axes.b_ids()[best_r];
    const IdA a = judgment.axes.a_ids()[best_c];
    out.pairs.emplace(b, a);
    out.trace.push_back(TraceStep{static_cast<int>(step), b, a, best});
  }
  return out;
}

Assignment optimal_assign(const JudgmentMatrix& judgment, const OptimalOptions& options) {
  check_input(judgment);
  const std::size_t n = judgment.size();
  if (n <= options.exhaustive_limit) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<std::size_t> best_perm = perm;
    double best = -std::numeric_limits<double>::infinity();
    do {
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) total += judgment.entries(i, perm[i]);
      if (total > best) {
        best = total;
        best_perm = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return from_columns(judgment, best_perm);
  }
  return from_columns(judgment, hungarian_max(judgment.entries));
}

double assignment_total(const JudgmentMatrix& judgment, const Assignment& assignment) {
  double total = 0.0;
  for (const auto& [b, a] : assignment.pairs) total += judgment.at(b, a);
  return total;
}

}  // namespace ebi::inference
