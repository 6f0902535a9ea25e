#include "gws/sampler.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include "gws/errors.hpp"

namespace gws {
namespace {

constexpr std::size_t kBulk = 256;         // alias cells holding literal values
constexpr std::uint64_t kRareCap = 1u << 20; // largest suffix-CDF extent
constexpr double kFoldTarget = 1e-15;      // acceptable folded tail mass
constexpr std::size_t kKestenCap = 100'000'000;

std::size_t next_pow2(std::size_t v) {
    std::size_t p = 1;
    while (p < v)
        p <<= 1;
    return p;
}

} // namespace

OffspringSampler::OffspringSampler(const OffspringDistribution& dist) {
    switch (dist.kind()) {
    case OffspringKind::geometric_half:
        ctz_geometric_ = true;
        return;
    case OffspringKind::heavy_tail:
        build_heavy(dist, false);
        return;
    case OffspringKind::finite_table: {
        std::vector<double> probs(dist.table_size());
        for (std::size_t k = 0; k < probs.size(); ++k)
            probs[k] = dist.pmf(k);
        build_alias(probs);
        return;
    }
    case OffspringKind::poisson_unit: {
        // pmf(255) is ~1e-507; the fold is exactly zero in doubles.
        std::vector<double> probs(kBulk);
        for (std::size_t k = 0; k < kBulk; ++k)
            probs[k] = dist.pmf(k);
        build_alias(probs);
        return;
    }
    }
    throw std::logic_error("unhandled offspring kind");
}

OffspringSampler::OffspringSampler(const SizeBiasedLaw& law) {
    const auto& base = law.base();
    if (base.kind() == OffspringKind::heavy_tail) {
        build_heavy(base, true);
        return;
    }
    // k p(k) dies superexponentially for the other kinds; the bulk range
    // (or the table itself) carries everything but a <1e-70 sliver.
    std::size_t extent = base.kind() == OffspringKind::finite_table ? base.table_size() : kBulk;
    std::vector<double> probs(extent);
    double total = 0.0;
    for (std::size_t k = 0; k < extent; ++k) {
        probs[k] = double(k) * base.pmf(k);
        total += probs[k];
    }
    truncated_mass_ = std::max(0.0, law.total_mass() - total);
    for (double& p : probs)
        p /= total; // draws follow the normalized law
    build_alias(probs);
}

// Vose's alias method over a power-of-two cell count; thresholds are
// stored as integers against the coin bits left over after the index.
void OffspringSampler::build_alias(const std::vector<double>& probs) {
    const std::size_t cells = next_pow2(std::max<std::size_t>(probs.size(), 2));
    const std::uint32_t index_bits = static_cast<std::uint32_t>(std::countr_zero(cells));
    mask_ = static_cast<std::uint32_t>(cells - 1);
    shift_ = index_bits;
    const std::uint32_t coin_bits = 64 - index_bits;

    std::vector<double> scaled(cells, 0.0);
    for (std::size_t i = 0; i < probs.size(); ++i)
        scaled[i] = probs[i] * double(cells);

    thresh_.assign(cells, 0);
    alias_.assign(cells, 0);
    std::vector<std::uint32_t> small, large;
    std::vector<double> weight = scaled;
    for (std::size_t i = 0; i < cells; ++i)
        (weight[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));

    std::vector<double> cell_thresh(cells, 1.0);
    while (!small.empty() && !large.empty()) {
        std::uint32_t s = small.back();
        small.pop_back();
        std::uint32_t l = large.back();
        large.pop_back();
        cell_thresh[s] = weight[s];
        alias_[s] = l;
        weight[l] -= 1.0 - weight[s];
        (weight[l] < 1.0 ? small : large).push_back(l);
    }
    // Leftovers in either list sit at threshold 1 (numerical dust aside).
    const double coin_scale = std::ldexp(1.0, static_cast<int>(coin_bits));
    for (std::size_t i = 0; i < cells; ++i) {
        double t = std::clamp(cell_thresh[i], 0.0, 1.0);
        thresh_[i] = static_cast<std::uint64_t>(std::llround(t * coin_scale));
    }
}

void OffspringSampler::build_heavy(const OffspringDistribution& d, bool size_biased) {
    auto mass = [&](std::uint64_t k) {
        return size_biased ? double(k) * d.pmf(k) : d.pmf(k);
    };
    const double beta = d.tail_exponent();
    const double c = d.tail_normalizer();
    // Integral bound for the mass beyond K: sum_{k>K} k^-(b+1) <= K^-b / b,
    // with one extra power of k when size biased.
    auto tail_above = [&](double K) {
        return size_biased ? c * std::pow(K, 1.0 - beta) / (beta - 1.0)
                           : c * std::pow(K, -beta) / beta;
    };
    std::uint64_t k_max = kBulk;
    while (k_max < kRareCap && tail_above(double(k_max)) > kFoldTarget)
        k_max *= 2;
    // Trim back to the smallest extent meeting the target (or the cap).
    while (k_max > kBulk && tail_above(double(k_max / 2)) <= kFoldTarget)
        k_max /= 2;
    truncated_mass_ = tail_above(double(k_max));

    rare_base_ = kBulk;
    rare_symbol_ = kBulk;
    const std::size_t rare_cells = static_cast<std::size_t>(k_max - kBulk) + 1;
    rare_cdf_.resize(rare_cells);
    double rare_mass = 0.0;
    for (std::size_t i = 0; i < rare_cells; ++i) {
        rare_mass += mass(rare_base_ + i);
        rare_cdf_[i] = rare_mass;
    }
    rare_mass += truncated_mass_; // folded into the final cell
    for (double& v : rare_cdf_)
        v /= rare_mass;
    rare_cdf_.back() = 1.0;

    // Bulk cells carry the literal values; a second block of cells of
    // equal total mass routes to the rare level, keeping the single-draw
    // alias exact.
    double total = size_biased ? d.mean() : 1.0;
    std::vector<double> probs(2 * kBulk);
    for (std::size_t k = 0; k < kBulk; ++k)
        probs[k] = mass(k) / total;
    for (std::size_t j = 0; j < kBulk; ++j)
        probs[kBulk + j] = rare_mass / total / double(kBulk);
    build_alias(probs);
}

std::uint64_t OffspringSampler::rare_from(SeededRng::State& st) const {
    double u = SeededRng::step_double(st);
    auto it = std::upper_bound(rare_cdf_.begin(), rare_cdf_.end(), u);
    if (it == rare_cdf_.end())
        --it;
    return rare_base_ + static_cast<std::uint64_t>(it - rare_cdf_.begin());
}

std::uint64_t OffspringSampler::draw_sum_capped(SeededRng& rng, std::uint64_t count,
                                                std::uint64_t cap) const {
    SeededRng::State st = rng.state();
    std::uint64_t sum = 0;
    if (ctz_geometric_) {
        for (std::uint64_t i = 0; i < count; ++i) {
            std::uint64_t u = SeededRng::step(st);
            if (u != 0) [[likely]] {
                sum += static_cast<std::uint64_t>(std::countr_zero(u));
            } else {
                std::uint64_t bias = 64;
                while ((u = SeededRng::step(st)) == 0)
                    bias += 64;
                sum += bias + static_cast<std::uint64_t>(std::countr_zero(u));
            }
            if (sum > cap)
                break;
        }
    } else {
        const std::uint64_t* th = thresh_.data();
        const std::uint32_t* al = alias_.data();
        const std::uint32_t mask = mask_, shift = shift_, rare = rare_symbol_;
        for (std::uint64_t i = 0; i < count; ++i) {
            std::uint64_t u = SeededRng::step(st);
            std::uint32_t idx = static_cast<std::uint32_t>(u) & mask;
            std::uint64_t v = (u >> shift) < th[idx] ? idx : al[idx];
            if (v >= rare) [[unlikely]]
                v = rare_from(st);
            sum += v;
            if (sum > cap)
                break;
        }
    }
    rng.restore(st);
    return sum;
}

void OffspringSampler::draw_fill(SeededRng& rng, std::uint32_t* out, std::size_t count) const {
    SeededRng::State st = rng.state();
    if (ctz_geometric_) {
        for (std::size_t i = 0; i < count; ++i) {
            std::uint64_t u = SeededRng::step(st);
            if (u != 0) [[likely]] {
                out[i] = static_cast<std::uint32_t>(std::countr_zero(u));
            } else {
                std::uint64_t bias = 64;
                while ((u = SeededRng::step(st)) == 0)
                    bias += 64;
                out[i] = static_cast<std::uint32_t>(bias +
                                                    std::uint64_t(std::countr_zero(u)));
            }
        }
    } else {
        const std::uint64_t* th = thresh_.data();
        const std::uint32_t* al = alias_.data();
        const std::uint32_t mask = mask_, shift = shift_, rare = rare_symbol_;
        for (std::size_t i = 0; i < count; ++i) {
            std::uint64_t u = SeededRng::step(st);
            std::uint32_t idx = static_cast<std::uint32_t>(u) & mask;
            std::uint64_t v = (u >> shift) < th[idx] ? idx : al[idx];
            if (v >= rare) [[unlikely]]
                v = rare_from(st);
            out[i] = static_cast<std::uint32_t>(v);
        }
    }
    rng.restore(st);
}

std::size_t lukasiewicz_rotation(const std::vector<std::uint32_t>& outdegs) {
    long long sum = 0, best = 0;
    std::size_t arg = outdegs.size() - 1;
    for (std::size_t i = 0; i < outdegs.size(); ++i) {
        sum += static_cast<long long>(outdegs[i]) - 1;
        if (sum < best) {
            best = sum;
            arg = i;
        }
    }
    return (arg + 1) % outdegs.size();
}

std::optional<OrderedTree> sample_gw(const OffspringDistribution& dist, SeededRng& rng,
                                     std::size_t cap) {
    OffspringSampler sampler(dist);
    return sample_gw(dist, sampler, rng, cap);
}

std::optional<OrderedTree> sample_gw(const OffspringDistribution& dist,
                                     const OffspringSampler& sampler, SeededRng& rng,
                                     std::size_t cap) {
    dist.require_valid();
    if (cap < 1)
        throw std::invalid_argument("node cap must be >= 1");
    // Generation by generation; each level's outdegrees are drawn left to
    // right, then expanded into the next level.
    std::vector<std::vector<std::uint32_t>> levels;
    std::size_t nodes = 1, pending = 1;
    while (pending > 0) {
        auto& level = levels.emplace_back();
        level.resize(pending);
        sampler.draw_fill(rng, level.data(), pending);
        std::size_t next_pending = 0;
        for (std::uint32_t k : level)
            next_pending += k;
        nodes += next_pending;
        if (nodes > cap)
            return std::nullopt;
        pending = next_pending;
    }

    // Flatten the level-order outdegrees into preorder.
    std::vector<std::uint32_t> degs;
    degs.reserve(nodes);
    // child_cursor[l] = next unread node of level l
    std::vector<std::size_t> cursor(levels.size(), 0);
    struct Frame {
        std::uint32_t level;
        std::uint32_t remaining;
    };
    std::vector<Frame> stack;
    auto visit = [&](std::uint32_t level) {
        std::uint32_t d = levels[level][cursor[level]++];
        degs.push_back(d);
        if (d > 0)
            stack.push_back({level + 1, d});
    };
    visit(0);
    while (!stack.empty()) {
        Frame& f = stack.back();
        if (f.remaining == 0) {
            stack.pop_back();
            continue;
        }
        f.remaining--;
        visit(f.level);
    }
    return OrderedTree::from_outdegrees(degs);
}

OrderedTree sample_conditioned(const OffspringDistribution& dist, std::uint64_t n,
                               SeededRng& rng) {
    OffspringSampler sampler(dist);
    return sample_conditioned(dist, sampler, n, rng);
}

OrderedTree sample_conditioned(const OffspringDistribution& dist,
                               const OffspringSampler& sampler, std::uint64_t n,
                               SeededRng& rng) {
    dist.require_valid();
    if (!dist.feasible_size(n))
        throw InfeasibleSize("no tree of size " + std::to_string(n) +
                             " has positive probability under " + dist.spec_string());
    std::vector<std::uint32_t> degs(1, 0);
    if (n > 1) {
        const std::uint64_t target = n - 1;
        for (;;) {
            // Sum-only pass; overshoot aborts early (values are >= 0), and
            // a full pass summing exactly to target is an accepted round.
            SeededRng::State mark = rng.state();
            if (sampler.draw_sum_capped(rng, n, target) != target)
                continue;
            // Replay the accepted round to materialize the values.
            rng.restore(mark);
            degs.resize(n);
            sampler.draw_fill(rng, degs.data(), n);
            break;
        }
        std::rotate(degs.begin(), degs.begin() + lukasiewicz_rotation(degs), degs.end());
    }
    return OrderedTree::from_outdegrees(degs);
}

OrderedTree sample_kesten(const OffspringDistribution& dist, std::uint32_t depth_cut,
                          SeededRng& rng) {
    OffspringSampler offspring(dist);
    OffspringSampler spine{SizeBiasedLaw(dist)};
    return sample_kesten(dist, offspring, spine, depth_cut, rng);
}

OrderedTree sample_kesten(const OffspringDistribution& dist, const OffspringSampler& offspring,
                          const OffspringSampler& spine, std::uint32_t depth_cut,
                          SeededRng& rng) {
    dist.require_valid();
    std::vector<std::uint32_t> degs;
    struct Node {
        std::uint32_t depth;
        bool on_spine;
    };
    std::vector<Node> stack{{0, true}};
    while (!stack.empty()) {
        Node node = stack.back();
        stack.pop_back();
        if (node.depth == depth_cut) {
            degs.push_back(0);
            continue;
        }
        if (node.on_spine) {
            std::uint64_t k = spine.draw(rng);
            std::uint64_t heir = rng.next_below(k);
            degs.push_back(static_cast<std::uint32_t>(k));
            for (std::uint64_t c = k; c-- > 0;)
                stack.push_back({node.depth + 1, c == heir});
        } else {
            std::uint64_t k = offspring.draw(rng);
            degs.push_back(static_cast<std::uint32_t>(k));
            for (std::uint64_t c = k; c-- > 0;)
                stack.push_back({node.depth + 1, false});
        }
        if (degs.size() + stack.size() > kKestenCap)
            throw std::length_error("spine tree exceeded the node cap");
    }
    return OrderedTree::from_outdegrees(degs);
}

} // namespace gws
