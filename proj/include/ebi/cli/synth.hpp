#pragma once

#include <cstdint>
#include <vector>

#include "json.hpp"
#include "ebi/core/dataset.hpp"

namespace ebi::cli {

// n split into nearly equal groups of at most max_group: 20 -> {7,7,6}.
std::vector<int> default_groups(int n, int max_group = 7);

// Placeholder profiles: attribute "Type" holds the group, id_A and id_B run
// 1..n, and the truth is a random bijection inside each group.
ProfileDataset synthetic_dataset(const std::vector<int>& groups, std::uint64_t seed);

// Seed of judge k (from 0) in a synthetic run.
std::uint64_t judge_seed(std::uint64_t seed, std::size_t k);

}  // namespace ebi::cli
