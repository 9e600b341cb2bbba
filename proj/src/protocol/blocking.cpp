#include "ebi/protocol/blocking.hpp"

#include <algorithm>
#include <map>

#include "ebi/core/error.hpp"

namespace ebi::protocol {

namespace {

using Signature = std::vector<std::string>;

Signature signature(const ProfileRecord& r, const std::vector<std::string>& keys) {
  Signature s;
  for (const auto& k : keys) {
    const auto* v = r.attribute(k);
    s.push_back(v ? *v : std::string());
  }
  return s;
}

void chunk(std::vector<IdA> a, std::vector<IdB> b, std::size_t size, std::vector<Block>& out) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  for (std::size_t start = 0; start < a.size(); start += size) {
    Block blk;
    blk.block_id = static_cast<int>(out.size());
    const auto end = std::min(a.size(), start + size);
    blk.ids.a.assign(a.begin() + start, a.begin() + end);
    blk.ids.b.assign(b.begin() + start, b.begin() + end);
    out.push_back(std::move(blk));
  }
}

}  // namespace

std::vector<Block> make_blocks(const ProfileDataset& dataset, int block_size) {
  if (block_size < 1) throw ValidationError("block_size must be >= 1");
  std::map<Signature, std::pair<std::vector<IdA>, std::vector<IdB>>> groups;
  for (const auto& r : dataset.side_a) groups[signature(r, dataset.attribute_keys)].first.push_back(IdA{r.id});
  for (const auto& r : dataset.side_b) groups[signature(r, dataset.attribute_keys)].second.push_back(IdB{r.id});

  std::vector<Block> out;
  std::vector<IdA> pool_a;
  std::vector<IdB> pool_b;
  for (auto& [sig, members] : groups) {
    auto& [a, b] = members;
    if (a.size() == b.size()) {
      chunk(a, b, static_cast<std::size_t>(block_size), out);
    } else {
      pool_a.insert(pool_a.end(), a.begin(), a.end());
      pool_b.insert(pool_b.end(), b.begin(), b.end());
    }
  }
  chunk(pool_a, pool_b, static_cast<std::size_t>(block_size), out);
  return out;
}

}  // namespace ebi::protocol
