#include "ebi/cli/synth.hpp"

#include <numeric>
#include <random>

#include "ebi/core/error.hpp"

namespace ebi::cli {

std::vector<int> default_groups(int n, int max_group) {
  if (n < 1) throw ValidationError("synthetic n must be at least 1");
  if (max_group < 1) throw ValidationError("group size must be at least 1");
  const int k = (n + max_group - 1) / max_group;
  std::vector<int> groups(k, n / k);
  for (int r = 0; r < n % k; ++r) ++groups[r];
  return groups;
}

ProfileDataset synthetic_dataset(const std::vector<int>& groups, std::uint64_t seed) {
  if (groups.empty()) throw ValidationError("synthetic dataset needs at least one group");
  ProfileDataset d;
  d.name = "synthetic";
  d.attribute_keys = {"Type"};
  std::mt19937_64 rng(seed);
  Truth truth;
  std::int64_t next = 1;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g] < 1) throw ValidationError("group sizes must be positive");
    std::vector<std::int64_t> ids(groups[g]);
    std::iota(ids.begin(), ids.end(), next);
    // Fisher-Yates on raw engine output; std::shuffle differs between
    // standard libraries.
    auto perm = ids;
    for (std::size_t k = perm.size(); k > 1; --k) std::swap(perm[k - 1], perm[rng() % k]);
    const std::string type = std::to_string(g + 1);
    for (std::size_t k = 0; k < ids.size(); ++k) {
      d.side_a.push_back({ids[k], {{"Type", type}}, {{"Profile(A)", "Placeholder profile A-" + std::to_string(ids[k])}}});
      d.side_b.push_back({ids[k], {{"Type", type}}, {{"Profile(B)", "Placeholder profile B-" + std::to_string(ids[k])}}});
      truth[IdB{ids[k]}] = IdA{perm[k]};
    }
    next += groups[g];
  }
  d.truth = std::move(truth);
  return d;
}

std::uint64_t judge_seed(std::uint64_t seed, std::size_t k) { return seed * 1000 + k + 1; }

}  // namespace ebi::cli
