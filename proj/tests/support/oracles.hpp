#pragma once

// Independent reference implementations used only by tests. None of these
// call into the library code they check.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

namespace oracle {

using Grid = std::vector<std::vector<double>>;

// Posterior evaluated literally from the Bayes formulation: prior
// P(a_j) = sum_i c_ji / C, evidence P(b_i) = sum_j P(b_i|a_j) P(a_j), and
// P(a_j|b_i) = P(b_i|a_j) P(a_j) / P(b_i). c is indexed [j][i]; the result is
// indexed [i][j]. Zero cells are replaced by eps first.
inline Grid brute_force_confidence(Grid c, double eps = 0.1) {
  const std::size_t n = c.size();
  for (auto& row : c)
    for (auto& x : row)
      if (x == 0.0) x = eps;
  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) total += c[j][i];
  std::vector<double> prior(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) prior[j] += c[j][i];
    prior[j] /= total;
  }
  std::vector<double> evidence(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    // (1/C) sum_jk c_ji c_jk, accumulated term by term
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) acc += c[j][i] * c[j][k];
    evidence[i] = acc / total;
  }
  Grid conf(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) conf[i][j] = c[j][i] * prior[j] / evidence[i];
  return conf;
}

// Best total over all n! pairings of rows to columns.
inline double exhaustive_best_total(const Grid& m) {
  const std::size_t n = m.size();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = -INFINITY;
  do {
    double t = 0.0;
    for (std::size_t i = 0; i < n; ++i) t += m[i][perm[i]];
    best = std::max(best, t);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

inline Grid random_grid(std::mt19937_64& rng, std::size_t n, double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Grid g(n, std::vector<double>(n));
  for (auto& row : g)
    for (auto& x : row) x = u(rng);
  return g;
}

// Half-width of a k-sigma binomial interval for a proportion.
inline double binomial_halfwidth(double p, double trials, double k = 3.0) {
  return k * std::sqrt(p * (1.0 - p) / trials);
}

}  // namespace oracle
