#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gws/offspring.hpp"
#include "gws/tree.hpp"

namespace gws {

// Exact conditioned-law answers at sizes far beyond enumeration, for the
// class of statistics that only see node degrees. Everything rests on two
// facts: the preorder degree sequence of the conditioned tree is an
// exchangeable offspring vector conditioned on its sum, and convolution
// powers of the offspring law are one FFT away. Accuracy is redundantly
// checked in tests against enumeration (small n) and closed forms (large n).

// pmf of S_count, a sum of `count` independent offspring draws: entry m is
// P(S_count = m) for m < len. The transform length covers both the request
// and the offspring tail, so truncation error is below 1e-12; a mass check
// raises PrecisionError if the result drifts beyond that.
std::vector<double> sum_pmf(const OffspringDistribution& dist, std::uint64_t count,
                            std::size_t len);

// P(|T| = n) by the same route; matches size_probability (which convolves
// directly) at small n and stays usable up to n ~ 10^6.
double size_probability_large(const OffspringDistribution& dist, std::uint64_t n);

// Law of the root degree of the n-node conditioned tree, entries 0..k_cap:
// P(d_root = j) = p_j (j/(n-1)) P(S_{n-1} = n-1-j) n / P(S_n = n-1).
std::vector<double> root_degree_law(const OffspringDistribution& dist, std::uint64_t n,
                                    std::size_t k_cap);

struct ExactPair {
    double mean = 0.0;
    double variance = 0.0;
};

// Exact mean and variance of N(T_n) = sum_v f(outdeg(v)), where f is given
// by value on 0..f.size()-1 and vanishes beyond (degrees above f's extent
// must have zero or negligible weight in context; the star wrappers below
// size f safely). Uses the pair identity
//   E N^2 = n E f(x1)^2 + n(n-1) E f(x1) f(x2)
// under the sum-conditioned exchangeable vector, with the cross term
// reduced to one self-convolution of f_j p_j.
ExactPair degree_sum_moments(const OffspringDistribution& dist, std::span<const double> f,
                             std::uint64_t n);

// Mean root toll of a star pattern with the given arm count at size n:
// E C(d_root, arms). Exact counterpart of the mu_k enumeration table.
double star_mu_n(const OffspringDistribution& dist, std::uint64_t arms, std::uint64_t n);

// Exact total-count moments for a star pattern: N = sum_v C(d_v, arms).
ExactPair star_total_moments(const OffspringDistribution& dist, std::uint64_t arms,
                             std::uint64_t n);

// Mean and variance of the root degree itself (the level-1 width).
ExactPair root_degree_moments(const OffspringDistribution& dist, std::uint64_t n);

// Expected number of nodes of T_n whose fringe subtree equals the given
// shape: n w(tau) P(S_{n-|tau|} = n-|tau|) / P(S_n = n-1), w = prod p(d_v).
double expected_fringe_count(const OffspringDistribution& dist, const OrderedTree& shape,
                             std::uint64_t n);

} // namespace gws
