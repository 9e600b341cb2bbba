#pragma once

#include <vector>

#include "ebi/core/dataset.hpp"
#include "ebi/protocol/parsers.hpp"

namespace ebi::protocol {

struct Block {
  int block_id = 0;
  BlockIds ids;
};

// Records sharing every declared attribute value form a group. Groups of equal
// size on both sides are chunked in lockstep (id order) into pieces of at most
// block_size; everything else is pooled and chunked the same way. Without
// attribute keys the whole dataset is one group.
std::vector<Block> make_blocks(const ProfileDataset& dataset, int block_size);

}  // namespace ebi::protocol
