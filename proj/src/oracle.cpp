#include "gws/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "gws/errors.hpp"
#include "gws/sampler.hpp"

namespace gws {

namespace {

constexpr std::uint64_t kMaxEnumerationNodes = 16;

void check_enumeration_size(std::uint64_t n) {
    if (n < 1 || n > kMaxEnumerationNodes) {
        throw OracleTooLarge("tree enumeration supports 1 <= n <= " +
                             std::to_string(kMaxEnumerationNodes) + ", got n = " +
                             std::to_string(n));
    }
}

// Extends a balanced-parenthesis word one character at a time, '(' before
// ')', so complete words come out in the lexicographic order of the
// serialized tree. The outdegree sequence is maintained in place: an open
// adds a node under the innermost open one, a close retires it.
class TreeWalker {
public:
    TreeWalker(std::uint64_t n, const std::function<void(const OrderedTree&)>& visit)
        : n_(static_cast<std::size_t>(n)), visit_(visit) {
        degs_.reserve(n_);
        open_.reserve(n_);
    }

    void run() { extend(); }

private:
    void extend() {
        if (degs_.size() == n_ && open_.empty()) {
            visit_(OrderedTree::from_outdegrees(degs_));
            return;
        }
        // A new node is legal unless all n are placed or the root is
        // already closed (a second top-level group would make a forest).
        if (degs_.size() < n_ && (degs_.empty() || !open_.empty())) {
            if (!open_.empty()) ++degs_[open_.back()];
            open_.push_back(static_cast<std::uint32_t>(degs_.size()));
            degs_.push_back(0);
            extend();
            degs_.pop_back();
            open_.pop_back();
            if (!open_.empty()) --degs_[open_.back()];
        }
        // Closing the root is deferred until every node is placed.
        if (!open_.empty() && (open_.size() > 1 || degs_.size() == n_)) {
            std::uint32_t node = open_.back();
            open_.pop_back();
            extend();
            open_.push_back(node);
        }
    }

    std::size_t n_;
    const std::function<void(const OrderedTree&)>& visit_;
    std::vector<std::uint32_t> degs_;
    std::vector<std::uint32_t> open_;
};

// prod_v p(d_v), with an early exit once a zero-probability degree appears.
double tree_weight(const OffspringDistribution& dist, const OrderedTree& t) {
    double w = 1.0;
    for (std::size_t v = 0; v < t.size(); ++v) {
        w *= dist.pmf(t.outdegree(v));
        if (w == 0.0) return 0.0;
    }
    return w;
}

double exact_factorial(std::uint64_t d) {
    double f = 1.0;
    for (std::uint64_t i = 2; i <= d; ++i) f *= double(i);
    return f;
}

} // namespace

void for_each_tree(std::uint64_t n, const std::function<void(const OrderedTree&)>& visit) {
    check_enumeration_size(n);
    TreeWalker(n, visit).run();
}

std::vector<OrderedTree> enumerate_trees(std::uint64_t n) {
    std::vector<OrderedTree> out;
    for_each_tree(n, [&](const OrderedTree& t) { out.push_back(t); });
    return out;
}

ExactLaw exact_conditioned_law(const OffspringDistribution& dist, std::uint64_t n) {
    dist.require_valid();
    check_enumeration_size(n);
    if (!dist.feasible_size(n)) {
        throw InfeasibleSize("size " + std::to_string(n) + " has probability zero under " +
                             dist.spec_string());
    }
    ExactLaw law;
    law.n = n;
    law.dist_spec = dist.spec_string();
    long double total = 0.0L;
    for_each_tree(n, [&](const OrderedTree& t) {
        double w = tree_weight(dist, t);
        if (w > 0.0) {
            law.support.emplace_back(t, w);
            total += w;
        }
    });
    if (law.support.empty()) {
        throw InfeasibleSize("no tree of size " + std::to_string(n) +
                             " has positive weight under " + dist.spec_string());
    }
    for (auto& [t, p] : law.support) p = double(p / total);
    return law;
}

ExactMoments exact_moments(const OffspringDistribution& dist, const Pattern& pat,
                           std::uint64_t n) {
    dist.require_valid();
    check_enumeration_size(n);
    if (!dist.feasible_size(n)) {
        throw InfeasibleSize("size " + std::to_string(n) + " has probability zero under " +
                             dist.spec_string());
    }
    // Streamed rather than built on an ExactLaw: the support at n = 16 is
    // ~9.7M trees and has no business being materialized.
    long double wsum = 0.0L, m1 = 0.0L, m2 = 0.0L;
    std::map<std::uint64_t, long double> hist;
    for_each_tree(n, [&](const OrderedTree& t) {
        double w = tree_weight(dist, t);
        if (w == 0.0) return;
        std::uint64_t count = subtree_count(pat, t);
        long double x = static_cast<long double>(count);
        wsum += w;
        m1 += w * x;
        m2 += w * x * x;
        hist[count] += w;
    });
    if (wsum <= 0.0L) {
        throw InfeasibleSize("no tree of size " + std::to_string(n) +
                             " has positive weight under " + dist.spec_string());
    }
    ExactMoments out;
    out.mean = double(m1 / wsum);
    long double var = m2 / wsum - (m1 / wsum) * (m1 / wsum);
    out.variance = std::max(0.0, double(var));
    for (const auto& [count, w] : hist) out.histogram[count] = double(w / wsum);
    return out;
}

std::map<std::uint64_t, double> mu_k_table(const OffspringDistribution& dist,
                                           const Pattern& pat, std::uint64_t k_max) {
    dist.require_valid();
    check_enumeration_size(k_max);
    std::map<std::uint64_t, double> out;
    for (std::uint64_t k = 1; k <= k_max; ++k) {
        if (!dist.feasible_size(k)) continue;
        long double wsum = 0.0L, toll_sum = 0.0L;
        for_each_tree(k, [&](const OrderedTree& t) {
            double w = tree_weight(dist, t);
            if (w == 0.0) return;
            wsum += w;
            toll_sum += w * static_cast<long double>(toll_count(pat, t));
        });
        if (wsum > 0.0L) out[k] = double(toll_sum / wsum);
    }
    return out;
}

double mu_unconditioned(const OffspringDistribution& dist, const Pattern& pat,
                        std::uint64_t series_k_max) {
    dist.require_valid();
    const OrderedTree& shape = pat.shape();
    double product = 1.0;
    for (std::size_t v = 0; v < shape.size(); ++v) {
        std::uint32_t d = shape.outdegree(v);
        if (d == 0) continue; // E C(xi, 0) = 1
        double fm = dist.factorial_moment(d);
        if (!std::isfinite(fm)) return std::numeric_limits<double>::infinity();
        product *= fm / exact_factorial(d);
    }

    // Self-check against the size decomposition sum_k pi_k mu_k. Partial
    // sums are a rigorous lower bound; the completion adds a heuristic cap
    // on the tail, whose exact value is out of reach (the size survival
    // decays like k^-1/2, so honest truncation error is Theta(k_max^-1/2)).
    std::vector<double> pis = dist.size_probabilities(static_cast<std::size_t>(series_k_max));
    std::map<std::uint64_t, double> mus = mu_k_table(dist, pat, series_k_max);
    long double partial = 0.0L, pi_covered = 0.0L;
    double mu_max = 0.0;
    for (std::uint64_t k = 1; k <= series_k_max; ++k) {
        pi_covered += pis[k]; // slot k holds pi_k
        auto it = mus.find(k);
        if (it == mus.end()) continue;
        partial += static_cast<long double>(pis[k]) * it->second;
        mu_max = std::max(mu_max, it->second);
    }
    double lower = double(partial);
    if (lower > product * (1.0 + 1e-9) + 1e-9) {
        throw PrecisionError("size-decomposition partial sum " + std::to_string(lower) +
                             " exceeds the product-form mean " + std::to_string(product));
    }
    double tail_mass = std::max(0.0, 1.0 - double(pi_covered));
    double upper = lower + 3.0 * mu_max * tail_mass;
    if (product > upper + 1e-9) {
        throw PrecisionError("product-form mean " + std::to_string(product) +
                             " falls outside the bracketed size decomposition [" +
                             std::to_string(lower) + ", " + std::to_string(upper) + "]");
    }
    return product;
}

double theta_star_closed_form(const OffspringDistribution& dist, std::uint64_t arms) {
    dist.require_valid();
    if (arms == 0) return 1.0; // the toll of the single-node pattern is 1
    unsigned d = static_cast<unsigned>(arms);
    double fm_up = dist.factorial_moment(d + 1);
    double fm_at = dist.factorial_moment(d);
    if (!std::isfinite(fm_up) || !std::isfinite(fm_at)) {
        return std::numeric_limits<double>::infinity();
    }
    // E C(xihat, d) = E xi C(xi, d) for a critical base law, and
    // k C(k, d) = (d+1) C(k, d+1) + d C(k, d) turns that into factorial
    // moments: (fm(d+1) + d fm(d)) / d!.
    return (fm_up + double(d) * fm_at) / exact_factorial(arms);
}

ThetaEstimate theta_kesten(const OffspringDistribution& dist, const Pattern& pat,
                           std::uint64_t reps, SeededRng& rng) {
    dist.require_valid();
    if (reps == 0) throw std::invalid_argument("theta_kesten needs reps >= 1");
    ThetaEstimate est;
    est.reps = reps;
    est.heavy_caveat = !std::isfinite(dist.moment(2 * pat.max_outdegree() + 1));

    OffspringSampler offspring(dist);
    OffspringSampler spine{SizeBiasedLaw(dist)};
    std::uint32_t depth_cut = pat.height(); // the root toll cannot see deeper
    double mean = 0.0, m2 = 0.0;
    for (std::uint64_t r = 0; r < reps; ++r) {
        OrderedTree t = sample_kesten(dist, offspring, spine, depth_cut, rng);
        double x = static_cast<double>(toll_count(pat, t));
        double delta = x - mean;
        mean += delta / double(r + 1);
        m2 += delta * (x - mean);
    }
    est.value = mean;
    if (reps >= 2) {
        double sample_var = m2 / double(reps - 1);
        est.std_error = std::sqrt(sample_var / double(reps));
    }
    return est;
}

} // namespace gws
