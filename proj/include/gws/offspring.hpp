#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace gws {

enum class OffspringKind {
    finite_table,   // explicit pmf over 0..K
    geometric_half, // p(k) = 2^-(k+1)
    poisson_unit,   // p(k) = e^-1 / k!
    heavy_tail,     // p(k) = c k^-(beta+1) for k >= 2, plus masses at 0 and 1
};

struct ValidationReport {
    bool mass_at_zero_positive = false;
    bool normalized = false; // |sum - 1| <= 1e-12
    bool critical = false;   // |mean - 1| <= 1e-9
    std::uint32_t span = 0;  // gcd of the positive support
    bool ok() const { return mass_at_zero_positive && normalized && critical; }
};

// Law of the number of children per node. Immutable value object; all
// queries are pure. Construction only enforces structural sanity
// (nonnegative, finite, normalizable pmf); the standing conditions
// (positive mass at zero, criticality) are reported by validate() and
// enforced by the entry points that rely on them.
class OffspringDistribution {
public:
    static OffspringDistribution geometric_half();
    static OffspringDistribution poisson_unit();

    // pmf[k] = P(xi = k). Throws InvalidDistribution when the table is
    // empty, has negative or non-finite entries, or sums to something
    // other than ~1 (no silent renormalization).
    static OffspringDistribution finite_table(std::vector<double> pmf);

    // p(k) = c k^-(beta+1) for k >= 2 with c = 1/(zeta(beta) - 1), which
    // makes the law critical with no mass at 1; the mass at 0 absorbs the
    // remainder. Of the one-parameter family of normalizers compatible
    // with total mass 1 and mean 1 this choice maximizes the tail weight,
    // which is the phenomenon of interest. Requires beta > 1. Moments of
    // order m exist exactly for m < beta.
    static OffspringDistribution heavy_tail(double beta);

    // Spec strings: "geom", "poisson", "table:0=0.5,2=0.5",
    // "heavytail:beta=3". Throws InvalidDistribution on anything else.
    static OffspringDistribution parse(std::string_view spec);

    OffspringKind kind() const { return kind_; }
    double pmf(std::uint64_t k) const;
    double mean() const;
    std::uint32_t span() const { return span_; }

    // Raw moment E xi^m as an extended real: +infinity is a meaningful
    // result (heavy tails), not an error. m >= 1.
    double moment(unsigned m) const;

    // Falling-factorial moment E xi(xi-1)...(xi-m+1), same conventions.
    double factorial_moment(unsigned m) const;

    // Var(xi); +infinity when the second moment diverges. Computed, never
    // enforced: the heavy-tail counterexamples live here on purpose.
    double variance() const;

    ValidationReport validate() const;

    // Throws InvalidDistribution unless validate().ok().
    void require_valid() const;

    // pi_k = P(|T| = k) for the unconditioned tree, via the cycle identity
    // pi_k = P(S_k = k-1)/k with S_k a sum of k independent offspring
    // draws. The convolution is restricted to values <= k-1, which loses
    // nothing: larger increments cannot reach the target cell. k >= 1.
    double size_probability(std::uint64_t k) const;

    // Batch variant: pi_1..pi_kmax in one incremental convolution sweep.
    std::vector<double> size_probabilities(std::size_t k_max) const;

    // Whether pi_n > 0: the residue condition n = 1 (mod span) plus, for
    // finite tables, reachability of n-1 as a sum of positive support
    // elements (checked by dynamic programming).
    bool feasible_size(std::uint64_t n) const;

    // Canonical spec string that parses back to this distribution.
    std::string spec_string() const;

    // Heavy-tail parameters (meaningful only for that kind).
    double tail_exponent() const { return beta_; }
    double tail_normalizer() const { return heavy_c_; }

    // Upper end of the finite table (table kind only).
    std::size_t table_size() const { return table_.size(); }

private:
    OffspringDistribution() = default;
    void compute_span();

    OffspringKind kind_ = OffspringKind::finite_table;
    std::vector<double> table_;
    double beta_ = 0.0;
    double heavy_c_ = 0.0;
    double heavy_p0_ = 0.0;
    double heavy_p1_ = 0.0;
    std::uint32_t span_ = 1;
};

// The size-biased law P(k) = k p(k) of spine-node outdegrees. Kept apart
// from OffspringDistribution because it is not critical and has no mass at
// zero. total_mass() equals the mean of the base law, so it is 1 exactly
// when the base is critical; both directions of that equivalence are
// observable by callers (perturbed inputs construct fine and report their
// off-unit mass).
class SizeBiasedLaw {
public:
    explicit SizeBiasedLaw(OffspringDistribution base);

    double pmf(std::uint64_t k) const { return double(k) * base_.pmf(k); }
    double total_mass() const { return base_.mean(); }

    // E xihat^m = E xi^(m+1) / total mass.
    double moment(unsigned m) const;

    const OffspringDistribution& base() const { return base_; }

private:
    OffspringDistribution base_;
};

} // namespace gws
