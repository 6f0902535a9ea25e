#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "gws/tree.hpp"

namespace gws {

// Arbitrary-precision count for the rare inputs whose embedding counts
// exceed 64 bits (they grow like n^|t| on adversarial trees).
using WideCount = boost::multiprecision::cpp_int;

// A fixed pattern tree t together with the precomputed structure the
// counting recursion and the degeneracy machinery keep asking for.
class Pattern {
public:
    explicit Pattern(OrderedTree shape);

    const OrderedTree& shape() const { return shape_; }
    std::uint32_t height() const { return shape_.height(); }
    std::uint32_t max_outdegree() const { return max_outdegree_; }

    // The subtrees hanging off the root, in child order; they decompose the
    // shape: t = root + branches.
    const std::vector<OrderedTree>& root_branches() const { return branches_; }

    // Cut of the shape at depth ell, for 0 <= ell <= height().
    const OrderedTree& level_cut(std::uint32_t ell) const { return cuts_.at(ell); }

    // Distinct fringe subtrees of the shape, deduplicated by shape and
    // ordered by (size, text form). Always contains the single node and the
    // shape itself.
    const std::vector<OrderedTree>& distinct_fringes() const { return fringes_; }

    // Child index lists per node of the shape, used by the counting DP.
    const std::vector<std::vector<std::uint32_t>>& child_lists() const { return children_; }

private:
    OrderedTree shape_;
    std::uint32_t max_outdegree_;
    std::vector<OrderedTree> branches_;
    std::vector<OrderedTree> cuts_;
    std::vector<OrderedTree> fringes_;
    std::vector<std::vector<std::uint32_t>> children_;
};

// Number of occurrences of the pattern anchored at the root of T: embeddings
// mapping root to root and the children of each pattern node to an
// increasing subsequence of the children of the image node. Exact; throws
// CountOverflow if the count does not fit in 64 bits.
std::uint64_t toll_count(const Pattern& pat, const OrderedTree& T);

// Total occurrences of the pattern as a general subtree of T, i.e. the
// anchored count summed over every fringe subtree of T.
std::uint64_t subtree_count(const Pattern& pat, const OrderedTree& T);

// Arbitrary-precision variants for counts beyond 64 bits.
WideCount toll_count_wide(const Pattern& pat, const OrderedTree& T);
WideCount subtree_count_wide(const Pattern& pat, const OrderedTree& T);

// Anchored count at every node of T in one pass (entry v is the toll of the
// fringe subtree at v). subtree_count is the sum of this vector.
std::vector<std::uint64_t> toll_per_node(const Pattern& pat, const OrderedTree& T);

// Independent oracle: explicit enumeration of all order-preserving
// injections, no dynamic programming shared with the counts above. Guarded
// to |pattern| <= 8 and |T| <= 14 (throws OracleTooLarge beyond).
std::uint64_t brute_force_count(const Pattern& pat, const OrderedTree& T, bool anchored);

// Fringe-size gate [lo, hi): tolls are kept only when the carrying subtree
// has size in the window. hi == unbounded means no upper limit; lo must be
// >= 1 and <= hi.
struct TruncationWindow {
    static constexpr std::size_t unbounded = SIZE_MAX;
    std::size_t lo = 1;
    std::size_t hi = unbounded;

    bool contains(std::size_t size) const { return size >= lo && size < hi; }
};

// Anchored count gated on |T| falling inside the window.
std::uint64_t truncated_toll(const Pattern& pat, TruncationWindow w, const OrderedTree& T);

// Sum of gated tolls over all fringe subtrees of T. With centered = true,
// each kept toll has the supplied per-size mean subtracted; the table must
// cover every gated fringe size that occurs (IncompleteTable otherwise).
double truncated_additive(const Pattern& pat, TruncationWindow w, const OrderedTree& T,
                          bool centered = false,
                          const std::map<std::size_t, double>* toll_means = nullptr);

} // namespace gws
