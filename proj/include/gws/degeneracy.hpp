// Degeneracy analysis for a pattern under an offspring law: search for a
// pair of equal-size, equal-cut trees on which the total count differs (the
// certificate implying a positive variance rate), the variance lower bound
// that pair yields, and a least-squares probe for the linear decomposition
// N_t(T) = g(|T|) + sum_i alpha_i n_{t_i}(T) that characterizes degenerate
// patterns.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gws/offspring.hpp"
#include "gws/pattern.hpp"
#include "gws/tree.hpp"

namespace gws {

struct DegeneracyCertificate {
    OrderedTree tau1;
    OrderedTree tau2;
    double p1 = 0.0;        // tree weight of tau1: product of p(d_v)
    double p2 = 0.0;        // tree weight of tau2
    std::int64_t delta = 0; // total count on tau1 minus total count on tau2
    double coefficient = 0.0; // delta^2 p1 p2 / (p1 + p2)
};

// Deterministic scan for a certificate: sizes ascending, trees in
// enumeration order, pairs lexicographically. A pair qualifies when both
// trees have positive weight, equal size, equal cuts at depth
// height(pattern) - 1, and different totals. Absence up to the bound is a
// legitimate result (nullopt). The bound is capped at 12 (OracleTooLarge
// beyond, same guard as the enumeration oracle).
std::optional<DegeneracyCertificate> find_certificate(const OffspringDistribution& dist,
                                                      const Pattern& pat,
                                                      std::uint64_t size_bound);

// Re-checks a certificate from scratch: positive weights recomputed from
// the pmf, sizes and cuts compared, and the count difference recomputed
// through the injection-based brute-force counter rather than the DP.
bool verify_certificate(const OffspringDistribution& dist, const Pattern& pat,
                        const DegeneracyCertificate& cert);

// The asymptotic variance lower bound delta^2 p1 p2 / (p1 + p2) * n implied
// by the certificate. Throws std::invalid_argument when the certificate
// fails re-verification against (dist, pat).
double variance_lower_bound(const OffspringDistribution& dist, const Pattern& pat,
                            const DegeneracyCertificate& cert, std::uint64_t n);

// Number of nodes of T whose fringe subtree equals tau.
std::uint64_t count_fringe_occurrences(const OrderedTree& T, const OrderedTree& tau);

struct LinearDecomposition {
    // Fitted size function, one value per size observed in the tree set.
    std::map<std::uint64_t, double> g;
    // Coefficient per regressor toll: the distinct fringe subtrees of the
    // pattern except the single node, whose constant toll is absorbed by g.
    std::vector<std::pair<OrderedTree, double>> alphas;
    double max_residual = 0.0;
    bool rank_deficient = false; // minimum-norm solution reported when set
    std::string caveat;
};

// Least-squares fit of the total count against size indicators and the
// fringe-pattern tolls, over every positive-weight tree up to size_bound.
// A residual at zero (within 1e-9) is evidence of degeneracy up to the
// bound, not a proof for all sizes; the caveat field says so.
LinearDecomposition fit_linear_decomposition(const OffspringDistribution& dist,
                                             const Pattern& pat, std::uint64_t size_bound);

} // namespace gws
