#include "gws/pattern.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "gws/errors.hpp"

namespace gws {
namespace {

// Shared DP over (tree node, pattern node) pairs. Tree nodes are processed
// in reverse preorder so every child row is ready before its parent; for
// each pair, a prefix DP matches the pattern node's branch list to an
// increasing subsequence of the tree node's children. Cost is
// O(|T| * |t| + edges(T) * edges(t)), table layout is row-per-tree-node.
//
// The unsigned-64 instantiation tracks overflow and reports it instead of
// wrapping; the wide instantiation never overflows.
template <class Int>
bool count_table(const Pattern& pat, const OrderedTree& T, std::vector<Int>& table) {
    const auto& shape = pat.shape();
    const std::size_t np = shape.size();
    const std::size_t nt = T.size();
    const auto& kids = pat.child_lists();

    table.assign(np * nt, Int{0});
    std::vector<Int> dp;
    bool overflow = false;

    auto checked_fma = [&](Int& acc, const Int& a, const Int& b) {
        if constexpr (std::is_same_v<Int, std::uint64_t>) {
            std::uint64_t prod = 0;
            if (__builtin_mul_overflow(a, b, &prod) || __builtin_add_overflow(acc, prod, &acc))
                overflow = true;
        } else {
            acc += a * b;
        }
    };

    for (std::size_t x = nt; x-- > 0;) {
        Int* row = table.data() + x * np;
        const std::uint32_t kx = T.outdegree(x);
        for (std::size_t u = 0; u < np; ++u) {
            const std::uint32_t du = shape.outdegree(u);
            if (du == 0) {
                row[u] = Int{1};
                continue;
            }
            if (du > kx)
                continue; // row already zero
            dp.assign(du + 1, Int{0});
            dp[0] = Int{1};
            std::uint32_t y = T.first_child(x);
            for (std::uint32_t i = 0; i < kx; ++i) {
                const Int* yrow = table.data() + static_cast<std::size_t>(y) * np;
                // Walk j downward so dp[j-1] still holds the value before
                // this child was considered.
                const std::uint32_t jmax = std::min<std::uint32_t>(du, i + 1);
                for (std::uint32_t j = jmax; j >= 1; --j)
                    checked_fma(dp[j], dp[j - 1], yrow[kids[u][j - 1]]);
                y = T.next_sibling(y);
            }
            row[u] = dp[du];
        }
    }
    return !overflow;
}

template <class Int>
bool sum_root_row(const Pattern& pat, const OrderedTree& T, const std::vector<Int>& table,
                  Int& out) {
    const std::size_t np = pat.shape().size();
    Int total{0};
    for (std::size_t x = 0; x < T.size(); ++x) {
        if constexpr (std::is_same_v<Int, std::uint64_t>) {
            if (__builtin_add_overflow(total, table[x * np], &total))
                return false;
        } else {
            total += table[x * np];
        }
    }
    out = total;
    return true;
}

[[noreturn]] void throw_overflow(const char* what) {
    throw CountOverflow(std::string(what) +
                        " exceeds 64 bits; use the wide-count entry point");
}

} // namespace

Pattern::Pattern(OrderedTree shape) : shape_(std::move(shape)) {
    max_outdegree_ = 0;
    children_.resize(shape_.size());
    for (std::size_t v = 0; v < shape_.size(); ++v) {
        max_outdegree_ = std::max(max_outdegree_, shape_.outdegree(v));
        children_[v].reserve(shape_.outdegree(v));
        for_each_child(shape_, v, [&](std::uint32_t c) { children_[v].push_back(c); });
    }

    for (std::uint32_t c : children_[0])
        branches_.push_back(fringe_at(shape_, c));

    cuts_.reserve(shape_.height() + 1);
    for (std::uint32_t ell = 0; ell <= shape_.height(); ++ell)
        cuts_.push_back(cut_at_depth(shape_, ell));

    // Deduplicate fringe subtrees by shape; order by (size, text) so the
    // list is stable for reports and fits.
    std::vector<std::pair<std::string, OrderedTree>> seen;
    for (std::size_t v = 0; v < shape_.size(); ++v) {
        OrderedTree f = fringe_at(shape_, v);
        std::string key = serialize_tree(f);
        bool dup = false;
        for (const auto& [k, unused] : seen)
            dup = dup || k == key;
        if (!dup)
            seen.emplace_back(std::move(key), std::move(f));
    }
    std::sort(seen.begin(), seen.end(), [](const auto& a, const auto& b) {
        if (a.second.size() != b.second.size())
            return a.second.size() < b.second.size();
        return a.first < b.first;
    });
    for (auto& [key, tree] : seen)
        fringes_.push_back(std::move(tree));
}

std::uint64_t toll_count(const Pattern& pat, const OrderedTree& T) {
    std::vector<std::uint64_t> table;
    if (!count_table(pat, T, table))
        throw_overflow("anchored count");
    return table[0];
}

std::uint64_t subtree_count(const Pattern& pat, const OrderedTree& T) {
    std::vector<std::uint64_t> table;
    std::uint64_t total = 0;
    if (!count_table(pat, T, table) || !sum_root_row(pat, T, table, total))
        throw_overflow("subtree count");
    return total;
}

WideCount toll_count_wide(const Pattern& pat, const OrderedTree& T) {
    std::vector<WideCount> table;
    count_table(pat, T, table);
    return table[0];
}

WideCount subtree_count_wide(const Pattern& pat, const OrderedTree& T) {
    std::vector<WideCount> table;
    count_table(pat, T, table);
    WideCount total;
    sum_root_row(pat, T, table, total);
    return total;
}

std::vector<std::uint64_t> toll_per_node(const Pattern& pat, const OrderedTree& T) {
    std::vector<std::uint64_t> table;
    if (!count_table(pat, T, table))
        throw_overflow("per-node anchored count");
    const std::size_t np = pat.shape().size();
    std::vector<std::uint64_t> tolls(T.size());
    for (std::size_t x = 0; x < T.size(); ++x)
        tolls[x] = table[x * np];
    return tolls;
}

std::uint64_t brute_force_count(const Pattern& pat, const OrderedTree& T, bool anchored) {
    const auto& shape = pat.shape();
    if (shape.size() > 8 || T.size() > 14)
        throw OracleTooLarge("brute-force guard is |pattern| <= 8, |tree| <= 14");

    const std::size_t np = shape.size();
    // Tree children as index lists, cheap at guard sizes.
    std::vector<std::vector<std::uint32_t>> tkids(T.size());
    for (std::size_t v = 0; v < T.size(); ++v)
        for_each_child(T, v, [&](std::uint32_t c) { tkids[v].push_back(c); });

    // Pattern node metadata: previous sibling (or none) to enforce the
    // increasing-subsequence order among siblings.
    std::vector<std::uint32_t> prev_sibling(np, UINT32_MAX);
    for (std::size_t v = 0; v < np; ++v) {
        const auto& ks = pat.child_lists()[v];
        for (std::size_t i = 1; i < ks.size(); ++i)
            prev_sibling[ks[i]] = ks[i - 1];
    }

    std::vector<std::uint32_t> image(np);    // pattern node -> tree node
    std::vector<std::uint32_t> position(np); // child slot used at the image's parent
    std::uint64_t found = 0;

    // Enumerates every injection one at a time: pattern nodes are assigned
    // in preorder; node i must map to a child of its parent's image, at a
    // child slot strictly after the slot used by its previous sibling.
    auto rec = [&](auto&& self, std::size_t i) -> void {
        if (i == np) {
            ++found;
            return;
        }
        const std::uint32_t pu = shape.parent(i);
        const auto& slots = tkids[image[pu]];
        const std::uint32_t start =
            prev_sibling[i] == UINT32_MAX ? 0 : position[prev_sibling[i]] + 1;
        for (std::uint32_t s = start; s < slots.size(); ++s) {
            image[i] = slots[s];
            position[i] = s;
            self(self, i + 1);
        }
    };

    auto anchored_count_at = [&](std::uint32_t v) {
        image[0] = v;
        rec(rec, 1);
    };

    if (anchored) {
        anchored_count_at(0);
    } else {
        for (std::size_t v = 0; v < T.size(); ++v)
            anchored_count_at(static_cast<std::uint32_t>(v));
    }
    return found;
}

std::uint64_t truncated_toll(const Pattern& pat, TruncationWindow w, const OrderedTree& T) {
    if (w.lo < 1 || w.lo > w.hi)
        throw std::invalid_argument("truncation window needs 1 <= lo <= hi");
    return w.contains(T.size()) ? toll_count(pat, T) : 0;
}

double truncated_additive(const Pattern& pat, TruncationWindow w, const OrderedTree& T,
                          bool centered, const std::map<std::size_t, double>* toll_means) {
    if (w.lo < 1 || w.lo > w.hi)
        throw std::invalid_argument("truncation window needs 1 <= lo <= hi");
    if (centered && toll_means == nullptr)
        throw std::invalid_argument("centered evaluation needs a toll-mean table");

    auto tolls = toll_per_node(pat, T);
    double total = 0.0;
    for (std::size_t v = 0; v < T.size(); ++v) {
        const std::size_t fringe = T.subtree_size(v);
        if (!w.contains(fringe))
            continue;
        double term = static_cast<double>(tolls[v]);
        if (centered) {
            auto it = toll_means->find(fringe);
            if (it == toll_means->end())
                throw IncompleteTable("no toll mean for fringe size " +
                                      std::to_string(fringe));
            term -= it->second;
        }
        total += term;
    }
    return total;
}

} // namespace gws
