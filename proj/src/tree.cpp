#include "gws/tree.hpp"

#include <charconv>
#include <stdexcept>

#include "gws/errors.hpp"

namespace gws {

OrderedTree OrderedTree::from_outdegrees(std::span<const std::uint32_t> degrees) {
    if (degrees.empty())
        throw std::invalid_argument("outdegree sequence is empty");
    // Lukasiewicz check: partial sums of (d_i - 1) stay >= 0 until the very
    // end, where the sum must hit -1 exactly once.
    std::int64_t walk = 0;
    for (std::size_t i = 0; i + 1 < degrees.size(); ++i) {
        walk += static_cast<std::int64_t>(degrees[i]) - 1;
        if (walk < 0)
            throw std::invalid_argument(
                "outdegree sequence ends a tree early (position " + std::to_string(i) + ")");
    }
    walk += static_cast<std::int64_t>(degrees.back()) - 1;
    if (walk != -1)
        throw std::invalid_argument("outdegree sequence does not close a single tree");

    OrderedTree t;
    t.outdeg_.assign(degrees.begin(), degrees.end());
    t.finish();
    return t;
}

void OrderedTree::finish() {
    const std::size_t n = outdeg_.size();
    parent_.resize(n);
    depth_.resize(n);
    subsize_.resize(n);

    // One preorder pass with an explicit stack of (node, children still to
    // come). A node's subtree size is known the moment its last descendant
    // has been emitted: it spans [v, next preorder index).
    std::vector<std::pair<std::uint32_t, std::uint32_t>> stack;
    parent_[0] = no_parent;
    depth_[0] = 0;
    height_ = 0;
    stack.emplace_back(0, outdeg_[0]);
    for (std::uint32_t v = 1; v < n; ++v) {
        while (stack.back().second == 0) {
            subsize_[stack.back().first] = v - stack.back().first;
            stack.pop_back();
        }
        auto& [p, remaining] = stack.back();
        --remaining;
        parent_[v] = p;
        depth_[v] = depth_[p] + 1;
        if (depth_[v] > height_)
            height_ = depth_[v];
        stack.emplace_back(v, outdeg_[v]);
    }
    while (!stack.empty()) {
        subsize_[stack.back().first] = static_cast<std::uint32_t>(n) - stack.back().first;
        stack.pop_back();
    }
}

OrderedTree parse_tree(std::string_view text) {
    if (text.empty())
        throw ParseError("empty tree text", 0);

    std::vector<std::uint32_t> outdeg;
    std::vector<std::uint32_t> open; // stack of node indices awaiting ')'
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char ch = text[i];
        if (ch == '(') {
            if (open.empty() && !outdeg.empty())
                throw ParseError("more than one top-level group", i);
            if (!open.empty())
                ++outdeg[open.back()];
            open.push_back(static_cast<std::uint32_t>(outdeg.size()));
            outdeg.push_back(0);
        } else if (ch == ')') {
            if (open.empty())
                throw ParseError("unmatched ')'", i);
            open.pop_back();
        } else {
            throw ParseError("unexpected character", i);
        }
    }
    if (!open.empty())
        throw ParseError("unclosed '('", text.size());
    return OrderedTree::from_outdegrees(outdeg);
}

std::string serialize_tree(const OrderedTree& t) {
    std::string out(2 * t.size(), '\0');
    std::size_t pos = 0;
    // Emit '(' at each preorder visit; a node's ')' lands right after its
    // subtree, i.e. at preorder offset v + subtree_size(v) plus the count
    // of ')' already owed. Simpler: walk the text recursively with a stack.
    std::vector<std::pair<std::uint32_t, std::uint32_t>> stack; // node, children left
    out[pos++] = '(';
    stack.emplace_back(0, t.outdegree(0));
    std::uint32_t next = 1;
    while (!stack.empty()) {
        auto& [v, remaining] = stack.back();
        if (remaining == 0) {
            out[pos++] = ')';
            stack.pop_back();
            continue;
        }
        --remaining;
        out[pos++] = '(';
        stack.emplace_back(next, t.outdegree(next));
        ++next;
    }
    return out;
}

OrderedTree parse_degree_csv(std::string_view text) {
    std::vector<std::uint32_t> outdeg;
    std::size_t i = 0;
    while (i <= text.size()) {
        std::size_t end = text.find(',', i);
        if (end == std::string_view::npos)
            end = text.size();
        std::uint32_t value = 0;
        auto [ptr, ec] = std::from_chars(text.data() + i, text.data() + end, value);
        if (ec != std::errc{} || ptr != text.data() + end)
            throw ParseError("expected a nonnegative integer", i);
        outdeg.push_back(value);
        if (end == text.size())
            break;
        i = end + 1;
    }
    try {
        return OrderedTree::from_outdegrees(outdeg);
    } catch (const std::invalid_argument& e) {
        throw ParseError(e.what(), text.size());
    }
}

std::string serialize_degree_csv(const OrderedTree& t) {
    std::string out;
    for (std::size_t v = 0; v < t.size(); ++v) {
        if (v)
            out += ',';
        out += std::to_string(t.outdegree(v));
    }
    return out;
}

OrderedTree cut_at_depth(const OrderedTree& t, std::uint32_t max_depth) {
    std::vector<std::uint32_t> outdeg;
    outdeg.reserve(t.size());
    for (std::size_t v = 0; v < t.size(); ++v) {
        if (t.depth(v) > max_depth)
            continue;
        // Children sit one level deeper; at the cut boundary they are all
        // dropped, which turns depth-max_depth nodes into leaves.
        outdeg.push_back(t.depth(v) < max_depth ? t.outdegree(v) : 0);
    }
    return OrderedTree::from_outdegrees(outdeg);
}

std::size_t level_width(const OrderedTree& t, std::uint32_t level) {
    std::size_t count = 0;
    for (std::size_t v = 0; v < t.size(); ++v)
        if (t.depth(v) == level)
            ++count;
    return count;
}

OrderedTree fringe_at(const OrderedTree& t, std::size_t v) {
    if (v >= t.size())
        throw std::out_of_range("node index " + std::to_string(v) + " out of range");
    auto degs = t.outdegrees().subspan(v, t.subtree_size(v));
    return OrderedTree::from_outdegrees(degs);
}

} // namespace gws
