#include "wagon/merkle.hpp"

#include "wagon/errors.hpp"

namespace wagon::merkle {

namespace {

Digest hash_pair(const Digest& left, const Digest& right) {
    Bytes buf;
    buf.reserve(64);
    buf.insert(buf.end(), left.begin(), left.end());
    buf.insert(buf.end(), right.begin(), right.end());
    return sha256(buf);
}

}  // namespace

Tree::Tree(std::vector<Digest> leaves) {
    if (leaves.empty()) throw WagonError(ErrorCode::EmptyCircuit, "merkle tree needs leaves");
    leaf_count_ = leaves.size();
    std::size_t padded = 1;
    while (padded < leaves.size()) padded <<= 1, ++depth_;
    leaves.resize(padded, Digest{});
    levels_.push_back(std::move(leaves));
    while (levels_.back().size() > 1) {
        const auto& prev = levels_.back();
        std::vector<Digest> next(prev.size() / 2);
        for (std::size_t i = 0; i < next.size(); ++i)
            next[i] = hash_pair(prev[2 * i], prev[2 * i + 1]);
        levels_.push_back(std::move(next));
    }
}

const Digest& Tree::root() const { return levels_.back().front(); }

std::vector<Digest> Tree::path(std::size_t index) const {
    std::vector<Digest> out;
    out.reserve(depth_);
    for (std::size_t level = 0; level < depth_; ++level) {
        out.push_back(levels_[level][index ^ 1]);
        index >>= 1;
    }
    return out;
}

bool verify_path(const Digest& leaf, std::size_t index, const std::vector<Digest>& path,
                 const Digest& root) {
    Digest node = leaf;
    for (const Digest& sibling : path) {
        node = (index & 1) ? hash_pair(sibling, node) : hash_pair(node, sibling);
        index >>= 1;
    }
    return node == root;
}

}  // namespace wagon::merkle
