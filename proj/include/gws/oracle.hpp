#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "gws/offspring.hpp"
#include "gws/pattern.hpp"
#include "gws/rng.hpp"
#include "gws/tree.hpp"

namespace gws {

// Exhaustive ground truth at small sizes. Everything here is enumeration
// based and guarded at n <= 16 (Catalan(15) ~ 9.7M trees); the streaming
// visitor is the scalable entry point, the materializing one is a
// convenience for small n.

// Visits every ordered tree with exactly n nodes, each once, in the
// lexicographic order of the parenthesis serialization ('(' sorts before
// ')', so deeper-first: "((()))" precedes "(()())"). Throws OracleTooLarge
// for n outside [1, 16].
void for_each_tree(std::uint64_t n, const std::function<void(const OrderedTree&)>& visit);

std::vector<OrderedTree> enumerate_trees(std::uint64_t n);

// The law of the conditioned tree as an explicit list: every n-node tree
// with positive weight prod_v p(d_v), normalized by pi_n.
struct ExactLaw {
    std::uint64_t n = 0;
    std::string dist_spec;
    std::vector<std::pair<OrderedTree, double>> support;
};

ExactLaw exact_conditioned_law(const OffspringDistribution& dist, std::uint64_t n);

// Exact mean, variance, and full value histogram of the total occurrence
// count over the n-node conditioned law.
struct ExactMoments {
    double mean = 0.0;
    double variance = 0.0;
    std::map<std::uint64_t, double> histogram;
};

ExactMoments exact_moments(const OffspringDistribution& dist, const Pattern& pat,
                           std::uint64_t n);

// k -> E(root toll at size k) for every feasible k <= k_max; infeasible
// sizes are absent.
std::map<std::uint64_t, double> mu_k_table(const OffspringDistribution& dist,
                                           const Pattern& pat, std::uint64_t k_max = 12);

// Mean root toll of the unconditioned tree, by the per-node product of
// binomial-coefficient means E C(xi, d_v). Returns +infinity when some
// factor diverges (heavy tails). The finite case is self-checked against
// the series sum_k pi_k mu_k: the partial sums are a rigorous lower bound
// (every term is nonnegative), and a heuristic completion bracket
// [partial, partial + 3 max_k mu_k P(|T| > k_max)] must contain the
// product. Truncation at any enumerable k_max leaves a Theta(k_max^-1/2)
// tail, so no tighter honest tolerance exists; Monte Carlo agreement is
// tested separately. Violations raise PrecisionError.
double mu_unconditioned(const OffspringDistribution& dist, const Pattern& pat,
                        std::uint64_t series_k_max = 12);

// E C(xihat, arms) for a star pattern with the given arm count: the mean
// root toll of the spine tree, in closed form through factorial moments.
double theta_star_closed_form(const OffspringDistribution& dist, std::uint64_t arms);

// Monte Carlo estimate of the mean root toll of the depth-cut spine tree
// (cut at the pattern height, which the toll cannot see past).
struct ThetaEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::uint64_t reps = 0;
    bool heavy_caveat = false; // E xi^(2 Delta + 1) diverges
};

ThetaEstimate theta_kesten(const OffspringDistribution& dist, const Pattern& pat,
                           std::uint64_t reps, SeededRng& rng);

} // namespace gws
