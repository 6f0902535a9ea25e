#pragma once

#include <bit>
#include <cstdint>
#include <optional>
#include <vector>

#include "gws/offspring.hpp"
#include "gws/rng.hpp"
#include "gws/tree.hpp"

namespace gws {

// Single-value offspring sampler compiled from a distribution. The
// geometric-half law uses the trailing-zero count of one uniform word;
// everything else goes through a Vose alias table sized to a power of two
// so index and coin come from a single draw. Heavy tails get a second
// level: alias symbols past the bulk range defer to a suffix-CDF binary
// search over [256, K], with K chosen so the mass folded into the last
// cell is below 1e-15 of the total (capped at 2^20 cells; the size-biased
// beta=3 law hits the cap and folds ~2e-12, reported by truncated_mass).
class OffspringSampler {
public:
    explicit OffspringSampler(const OffspringDistribution& dist);
    explicit OffspringSampler(const SizeBiasedLaw& law);

    std::uint64_t draw(SeededRng& rng) const {
        SeededRng::State st = rng.state();
        std::uint64_t v = draw_from(st);
        rng.restore(st);
        return v;
    }

    // Sum of `count` draws, aborting as soon as the running sum exceeds
    // cap (so a return value <= cap means all draws were consumed). The
    // rng advances by however many draws were taken.
    std::uint64_t draw_sum_capped(SeededRng& rng, std::uint64_t count,
                                  std::uint64_t cap) const;

    // `count` draws written to out; consumes the stream exactly like the
    // same number of single draws.
    void draw_fill(SeededRng& rng, std::uint32_t* out, std::size_t count) const;

    // pmf mass beyond the largest representable value, folded into it
    double truncated_mass() const { return truncated_mass_; }

private:
    OffspringSampler() = default;
    void build_alias(const std::vector<double>& probs);
    void build_heavy(const OffspringDistribution& d, bool size_biased);
    std::uint64_t rare_from(SeededRng::State& st) const;

    std::uint64_t draw_from(SeededRng::State& st) const {
        if (ctz_geometric_) {
            std::uint64_t bias = 0;
            for (;;) {
                std::uint64_t u = SeededRng::step(st);
                if (u != 0)
                    return bias + static_cast<std::uint64_t>(std::countr_zero(u));
                bias += 64;
            }
        }
        std::uint64_t u = SeededRng::step(st);
        std::uint32_t i = static_cast<std::uint32_t>(u) & mask_;
        std::uint32_t sym = (u >> shift_) < thresh_[i] ? i : alias_[i];
        if (sym < rare_symbol_)
            return sym;
        return rare_from(st);
    }

    bool ctz_geometric_ = false;
    std::uint32_t mask_ = 0;
    std::uint32_t shift_ = 64;
    std::uint32_t rare_symbol_ = UINT32_MAX; // alias symbols >= this defer
    std::vector<std::uint64_t> thresh_;
    std::vector<std::uint32_t> alias_;
    std::vector<double> rare_cdf_; // conditional CDF of values rare_base_+i
    std::uint64_t rare_base_ = 0;
    double truncated_mass_ = 0.0;
};

// Position at which the cyclic rotation of a preorder outdegree sequence
// with sum n-1 becomes the unique valid single-tree sequence: one past the
// first index attaining the minimum of the prefix sums of (d_i - 1),
// taken mod n. Rotating an already valid sequence returns 0.
std::size_t lukasiewicz_rotation(const std::vector<std::uint32_t>& outdegs);

// Unconditioned tree, realized breadth first; nullopt when the population
// outgrows cap before dying out.
std::optional<OrderedTree> sample_gw(const OffspringDistribution& dist, SeededRng& rng,
                                     std::size_t cap = 10'000'000);
std::optional<OrderedTree> sample_gw(const OffspringDistribution& dist,
                                     const OffspringSampler& sampler, SeededRng& rng,
                                     std::size_t cap = 10'000'000);

// Tree conditioned on having exactly n nodes: n i.i.d. draws are rejected
// until they sum to n-1 (expected O(sqrt n) rounds), then rotated into the
// unique valid sequence. Throws InfeasibleSize when no n-node tree has
// positive probability. The sampler-reusing overload skips table
// construction in replicate loops; the rng is snapshotted before each
// round and replayed on acceptance, so rejected rounds touch no memory.
OrderedTree sample_conditioned(const OffspringDistribution& dist, std::uint64_t n,
                               SeededRng& rng);
OrderedTree sample_conditioned(const OffspringDistribution& dist,
                               const OffspringSampler& sampler, std::uint64_t n,
                               SeededRng& rng);

// Depth-truncated spine tree: spine nodes (depth < depth_cut) draw
// size-biased outdegrees and route the spine through a uniformly chosen
// child; all other nodes grow ordinary GW subtrees; everything at
// depth_cut is a leaf. depth_cut = 0 gives the single node. Guards
// against pathological width with a hard 1e8-node cap (std::length_error;
// unreachable for the laws and depths exercised here).
OrderedTree sample_kesten(const OffspringDistribution& dist, std::uint32_t depth_cut,
                          SeededRng& rng);
OrderedTree sample_kesten(const OffspringDistribution& dist, const OffspringSampler& offspring,
                          const OffspringSampler& spine, std::uint32_t depth_cut,
                          SeededRng& rng);

} // namespace gws
