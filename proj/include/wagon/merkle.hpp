#pragma once

#include <cstdint>
#include <vector>

#include "wagon/util.hpp"

namespace wagon::merkle {

// Binary SHA-256 Merkle tree. Leaves are padded with all-zero digests up to
// the next power of two; a single leaf yields a depth-0 tree (root == leaf).
class Tree {
public:
    explicit Tree(std::vector<Digest> leaves);

    const Digest& root() const;
    std::size_t leaf_count() const { return leaf_count_; }
    std::size_t depth() const { return depth_; }

    // Sibling nodes bottom-up for the given leaf index.
    std::vector<Digest> path(std::size_t index) const;

private:
    std::size_t leaf_count_ = 0;
    std::size_t depth_ = 0;
    std::vector<std::vector<Digest>> levels_;  // levels_[0] = padded leaves
};

bool verify_path(const Digest& leaf, std::size_t index, const std::vector<Digest>& path,
                 const Digest& root);

}  // namespace wagon::merkle
