#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gws {

// Rooted plane tree stored as flat preorder arrays. Nodes are identified by
// preorder index, the root is node 0, and child order is significant.
// Immutable once built; safe to share across threads.
//
// The preorder outdegree sequence d_0..d_{n-1} of a valid tree satisfies the
// Lukasiewicz condition: sum_{i<=j} (d_i - 1) >= 0 for every j < n-1 and
// == -1 at j = n-1. Construction validates this, so every OrderedTree in
// the program is structurally sound.
class OrderedTree {
public:
    static constexpr std::uint32_t no_parent = UINT32_MAX;

    // Builds a tree from its preorder outdegree sequence; throws
    // std::invalid_argument if the sequence is empty or not Lukasiewicz.
    static OrderedTree from_outdegrees(std::span<const std::uint32_t> degrees);

    std::size_t size() const { return outdeg_.size(); }
    std::uint32_t outdegree(std::size_t v) const { return outdeg_[v]; }

    // Parent index, or no_parent for the root.
    std::uint32_t parent(std::size_t v) const { return parent_[v]; }
    std::uint32_t depth(std::size_t v) const { return depth_[v]; }

    // Number of nodes in the fringe subtree rooted at v (v included).
    std::uint32_t subtree_size(std::size_t v) const { return subsize_[v]; }
    std::uint32_t height() const { return height_; }

    // Children of v are first_child(v), then repeated next_sibling steps,
    // outdegree(v) times. In preorder the first child is adjacent and a
    // sibling starts right after the previous sibling's subtree.
    std::uint32_t first_child(std::size_t v) const {
        return static_cast<std::uint32_t>(v) + 1;
    }
    std::uint32_t next_sibling(std::size_t c) const {
        return static_cast<std::uint32_t>(c) + subsize_[c];
    }

    std::span<const std::uint32_t> outdegrees() const { return outdeg_; }

    // Shape equality; ordered trees are in bijection with their preorder
    // outdegree sequences.
    bool operator==(const OrderedTree& other) const {
        return outdeg_ == other.outdeg_;
    }

private:
    OrderedTree() = default;

    // Fills parent/depth/subtree-size/height from outdeg_, assuming the
    // sequence was already validated.
    void finish();

    std::vector<std::uint32_t> outdeg_;
    std::vector<std::uint32_t> parent_;
    std::vector<std::uint32_t> depth_;
    std::vector<std::uint32_t> subsize_;
    std::uint32_t height_ = 0;
};

// Applies f to each child index of v, left to right.
template <class F>
void for_each_child(const OrderedTree& t, std::size_t v, F&& f) {
    std::uint32_t c = t.first_child(v);
    for (std::uint32_t i = 0; i < t.outdegree(v); ++i) {
        f(c);
        c = t.next_sibling(c);
    }
}

// Balanced-parenthesis text form: each node is "(" + children + ")", no
// whitespace, a single top-level group. Throws ParseError with a byte
// offset on malformed input.
OrderedTree parse_tree(std::string_view text);
std::string serialize_tree(const OrderedTree& t);

// Numeric alternative: comma-separated preorder outdegrees, e.g. "2,0,0".
OrderedTree parse_degree_csv(std::string_view text);
std::string serialize_degree_csv(const OrderedTree& t);

// Subtree induced by the nodes at depth <= max_depth, preserving child
// order. Identity when max_depth >= height.
OrderedTree cut_at_depth(const OrderedTree& t, std::uint32_t max_depth);

// Number of nodes at depth exactly `level` (1 for level 0).
std::size_t level_width(const OrderedTree& t, std::uint32_t level);

// The fringe subtree rooted at node v, re-rooted as a standalone tree.
// Throws std::out_of_range for an invalid index.
OrderedTree fringe_at(const OrderedTree& t, std::size_t v);

} // namespace gws
